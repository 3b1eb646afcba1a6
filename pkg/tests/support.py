"""Shared helpers for the test suite."""

import numpy as np

from sdemoments import LinearSde, MomentState

CLASSES = ("non_autonomous", "autonomous_multiplicative", "autonomous_additive")


def random_stable_model(rng, d, kind, m=None):
    """Random model of the requested class with a Hurwitz drift matrix.

    Entries are uniform in [-1, 1]; A is shifted so its spectral
    abscissa is -0.5. t0 is drawn in [-0.5, 0.5].
    """
    if m is None:
        m = int(rng.integers(1, 3))
    t0 = float(rng.uniform(-0.5, 0.5))
    A = rng.uniform(-1.0, 1.0, (d, d))
    A = A - (np.linalg.eigvals(A).real.max() + 0.5) * np.eye(d)
    a0 = rng.uniform(-1.0, 1.0, d)
    b0 = rng.uniform(-1.0, 1.0, (m, d))
    if kind == "non_autonomous":
        sde = LinearSde(d=d, m=m, A=A, a0=a0, a1=rng.uniform(-1.0, 1.0, d),
                        B=rng.uniform(-1.0, 1.0, (m, d, d)), b0=b0,
                        b1=rng.uniform(-1.0, 1.0, (m, d)), t0=t0)
    elif kind == "autonomous_multiplicative":
        sde = LinearSde(d=d, m=m, A=A, a0=a0,
                        B=rng.uniform(-1.0, 1.0, (m, d, d)), b0=b0, t0=t0)
    elif kind == "autonomous_additive":
        sde = LinearSde(d=d, m=m, A=A, a0=a0, b0=b0, t0=t0)
    else:
        raise ValueError(kind)
    return sde, random_state(rng, d)


def random_state(rng, d):
    """Random valid MomentState: P0 = 0.5 G G^T + m0 m0^T."""
    m0 = rng.uniform(-1.0, 1.0, d)
    G = rng.uniform(-1.0, 1.0, (d, d))
    P0 = 0.5 * (G @ G.T) + np.outer(m0, m0)
    return MomentState(m0=m0, P0=(P0 + P0.T) / 2.0)


def rel_diff(a, b, floor=1e-300):
    """max-abs difference over max-abs of the reference."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.abs(a - b).max()) / max(float(np.abs(b).max()), floor)
