"""Check the engine against scalar models with known closed forms.

Geometric Brownian motion dx = a x dt + b x dw has
E x_t = e^{a t} and E x_t^2 = e^{(2a + b^2) t}; the Ornstein-Uhlenbeck
process dx = -x dt + dw started at zero has variance (1 - e^{-2t}) / 2.
"""

import numpy as np

from sdemoments import LinearSde, MomentState, moments_at

a, b = 0.3, 0.5
gbm = LinearSde(d=1, m=1, A=[[a]], a0=[0.0], B=[[[b]]], b0=[[0.0]])
state = MomentState(m0=[1.0], P0=[[1.0]])

print("geometric Brownian motion, a = %.2f, b = %.2f" % (a, b))
print("%6s  %14s  %14s  %10s" % ("t", "mean", "exact", "rel err"))
for t in (0.25, 0.5, 1.0, 2.0):
    res = moments_at(gbm, state, t)
    exact = np.exp(a * t)
    print("%6.2f  %14.10f  %14.10f  %10.2e"
          % (t, res.mean[0], exact, abs(res.mean[0] - exact) / exact))

print()
print("%6s  %14s  %14s  %10s" % ("t", "secmom", "exact", "rel err"))
for t in (0.25, 0.5, 1.0, 2.0):
    res = moments_at(gbm, state, t)
    exact = np.exp((2.0 * a + b * b) * t)
    print("%6.2f  %14.10f  %14.10f  %10.2e"
          % (t, res.secmom[0, 0], exact,
             abs(res.secmom[0, 0] - exact) / exact))

ou = LinearSde(d=1, m=1, A=[[-1.0]], a0=[0.0], b0=[[1.0]])
zero = MomentState(m0=[0.0], P0=[[0.0]])

print()
print("Ornstein-Uhlenbeck from rest, dx = -x dt + dw")
print("%6s  %14s  %14s  %10s" % ("t", "variance", "exact", "rel err"))
for t in (0.5, 1.0, 2.0, 5.0):
    res = moments_at(ou, zero, t)
    exact = (1.0 - np.exp(-2.0 * t)) / 2.0
    print("%6.2f  %14.10f  %14.10f  %10.2e"
          % (t, res.variance[0, 0], exact,
             abs(res.variance[0, 0] - exact) / exact))
