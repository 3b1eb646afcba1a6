"""Dense matrix exponentials and exponential actions on vectors.

The dense path is diagonal Pade approximation with norm-based scaling and
squaring; the vector path is an Arnoldi projection onto a Krylov subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExpmOptions",
    "ExpmError",
    "ExpmOverflowError",
    "ExpmConvergenceError",
    "expm",
    "expm_action",
]

#: supported diagonal Pade orders and their 1-norm scaling thresholds
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068,
    13: 5.371920351148152,
}

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0,
    ),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ),
}


class ExpmError(RuntimeError):
    """Failure inside a matrix-exponential evaluation."""


class ExpmOverflowError(ExpmError):
    """The exponential is not representable in double precision."""


class ExpmConvergenceError(ExpmError):
    """Krylov iteration did not reach the requested tolerance.

    Attributes
    ----------
    residual : float
        Relative change of the iterate at the last step, the a posteriori
        accuracy estimate at the point of failure.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class ExpmOptions:
    """Evaluation controls for :func:`expm` and :func:`expm_action`.

    Attributes
    ----------
    method : str
        ``"dense"`` (Pade with scaling and squaring) or ``"action"``
        (Krylov projection; only meaningful where a vector product
        is requested).
    pade_order : int
        Diagonal Pade order; one of 3, 5, 7, 9, 13.
    tolerance : float
        Relative convergence tolerance of the Krylov iteration.
    balance : bool
        Apply a radix-2 similarity balancing before the Pade evaluation.
        Off by default.
    max_krylov : int
        Iteration cap of the Krylov subspace; exceeding it raises
        :class:`ExpmConvergenceError`.
    """

    method: str = "dense"
    pade_order: int = 13
    tolerance: float = 1e-12
    balance: bool = False
    max_krylov: int = 96


def _as_square(a, name: str = "a") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _balance(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Radix-2 Osborne balancing: returns (b, d) with b = inv(D) a D, D = diag(d)."""
    b = a.copy()
    n = b.shape[0]
    scale = np.ones(n)
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            c = np.sum(np.abs(b[:, i])) - abs(b[i, i])
            r = np.sum(np.abs(b[i, :])) - abs(b[i, i])
            if c == 0.0 or r == 0.0:
                continue
            s = c + r
            f = 1.0
            while c < r / radix:
                c *= radix
                r /= radix
                f *= radix
            while c >= r * radix:
                c /= radix
                r *= radix
                f /= radix
            if c + r < 0.95 * s:
                converged = False
                scale[i] *= f
                b[:, i] *= f
                b[i, :] /= f
    return b, scale


def _pade_uv(a: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    c = _PADE_COEFFS[order]
    n = a.shape[0]
    eye = np.eye(n)
    a2 = a @ a
    if order == 3:
        u = a @ (c[3] * a2 + c[1] * eye)
        v = c[2] * a2 + c[0] * eye
    elif order == 5:
        a4 = a2 @ a2
        u = a @ (c[5] * a4 + c[3] * a2 + c[1] * eye)
        v = c[4] * a4 + c[2] * a2 + c[0] * eye
    elif order == 7:
        a4 = a2 @ a2
        a6 = a2 @ a4
        u = a @ (c[7] * a6 + c[5] * a4 + c[3] * a2 + c[1] * eye)
        v = c[6] * a6 + c[4] * a4 + c[2] * a2 + c[0] * eye
    elif order == 9:
        a4 = a2 @ a2
        a6 = a2 @ a4
        a8 = a4 @ a4
        u = a @ (c[9] * a8 + c[7] * a6 + c[5] * a4 + c[3] * a2 + c[1] * eye)
        v = c[8] * a8 + c[6] * a6 + c[4] * a4 + c[2] * a2 + c[0] * eye
    else:
        a4 = a2 @ a2
        a6 = a2 @ a4
        u = a @ (a6 @ (c[13] * a6 + c[11] * a4 + c[9] * a2)
                 + c[7] * a6 + c[5] * a4 + c[3] * a2 + c[1] * eye)
        v = (a6 @ (c[12] * a6 + c[10] * a4 + c[8] * a2)
             + c[6] * a6 + c[4] * a4 + c[2] * a2 + c[0] * eye)
    return u, v


def expm(a, t: float = 1.0, options: ExpmOptions | None = None) -> np.ndarray:
    """Dense matrix exponential e^(a*t).

    Parameters
    ----------
    a : array_like
        Square matrix with finite entries.
    t : float
        Scalar factor multiplying ``a``; any finite real value.
    options : ExpmOptions, optional
        ``pade_order`` selects the diagonal approximant (default 13);
        ``balance`` enables radix-2 similarity balancing.

    Returns
    -------
    ndarray
        The exponential. An exponential whose entries leave the double
        range raises :class:`ExpmOverflowError` rather than returning
        infinities.
    """
    opts = options if options is not None else ExpmOptions()
    a = _as_square(a)
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t!r}")
    if opts.pade_order not in _THETA:
        raise ValueError(
            f"pade_order must be one of {sorted(_THETA)}, got {opts.pade_order!r}")

    b = a * t
    scale = None
    if opts.balance:
        b, scale = _balance(b)

    theta = _THETA[opts.pade_order]
    norm = np.linalg.norm(b, 1)
    if norm == 0.0:
        result = np.eye(b.shape[0])
    else:
        squarings = 0
        if norm > theta:
            squarings = int(math.ceil(math.log2(norm / theta)))
            b = b / (2.0 ** squarings)
        u, v = _pade_uv(b, opts.pade_order)
        try:
            result = np.linalg.solve(v - u, v + u)
        except np.linalg.LinAlgError as exc:
            raise ExpmError(f"Pade denominator is singular: {exc}") from exc
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(squarings):
                result = result @ result

    if scale is not None:
        result = result * scale[:, None] / scale[None, :]
    if not np.all(np.isfinite(result)):
        raise ExpmOverflowError(
            "matrix exponential overflows double precision; "
            "rescale the problem or reduce t")
    return result


def expm_action(a, v, t: float = 1.0, options: ExpmOptions | None = None) -> np.ndarray:
    """Product e^(a*t) @ v without forming the dense exponential.

    Builds an Arnoldi basis of the Krylov space span{v, a v, a^2 v, ...}
    and exponentiates the small projected matrix. Iteration stops when
    the iterate changes by less than ``options.tolerance`` in relative
    norm, on exact invariance (happy breakdown), or when the basis spans
    the full space. Hitting ``options.max_krylov`` first raises
    :class:`ExpmConvergenceError` carrying the last relative change as
    its ``residual``.
    """
    opts = options if options is not None else ExpmOptions()
    a = _as_square(a)
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != a.shape[0]:
        raise ValueError(f"v must be 1-d of length {a.shape[0]}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("v contains non-finite entries")
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise ValueError(f"t must be finite and nonnegative, got {t!r}")
    if not (opts.tolerance > 0.0):
        raise ValueError(f"tolerance must be positive, got {opts.tolerance!r}")

    n = a.shape[0]
    beta = np.linalg.norm(v)
    if t == 0.0 or beta == 0.0:
        return v.copy()

    cap = min(n, int(opts.max_krylov))
    basis = np.zeros((n, cap + 1))
    h = np.zeros((cap + 1, cap))
    basis[:, 0] = v / beta
    dense_opts = ExpmOptions(pade_order=opts.pade_order)

    prev = None
    rel_change = np.inf
    for j in range(cap):
        w = a @ basis[:, j]
        for i in range(j + 1):
            h[i, j] = basis[:, i] @ w
            w -= h[i, j] * basis[:, i]
        h_next = np.linalg.norm(w)
        h[j + 1, j] = h_next
        m = j + 1
        small = expm(h[:m, :m], t, dense_opts)
        u = beta * (basis[:, :m] @ small[:, 0])

        if h_next <= 1e-14 * max(1.0, np.abs(h[:m, :m]).max()):
            return u  # invariant subspace reached: projection is exact
        if prev is not None:
            rel_change = np.linalg.norm(u - prev) / max(np.linalg.norm(u), 1e-300)
            if rel_change <= opts.tolerance:
                return u
        prev = u
        basis[:, j + 1] = w / h_next

    if cap == n:
        return u  # full basis: projected problem equals the original
    raise ExpmConvergenceError(
        f"Krylov iteration did not converge within {cap} iterations "
        f"(last relative change {rel_change:.3e}); raise max_krylov or "
        f"loosen tolerance",
        residual=rel_change,
    )
