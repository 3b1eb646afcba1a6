"""Kronecker products, Kronecker sums and column-stacking vectorization."""

from __future__ import annotations

import numpy as np

__all__ = ["kron", "kron_sum", "kron_sum_vec", "vec", "unvec", "hilbert"]


def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or min(a.shape) < 1:
        raise ValueError(f"{name} must be 2-d with at least one row and column, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _as_vector(a, name: str = "vector") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.shape[0] < 1:
        raise ValueError(f"{name} must be 1-d with at least one entry, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices.

    :param a: (m, n) matrix
    :param b: (p, q) matrix
    :return: (m*p, n*q) matrix of all pairwise products a[i, j] * b
    """
    return np.kron(_as_matrix(a, "a"), _as_matrix(b, "b"))


def kron_sum(a, b) -> np.ndarray:
    """Kronecker sum a (+) b = a (x) I + I (x) b of two square matrices.

    Its spectrum is the set of pairwise sums of the spectra of ``a`` and ``b``.
    """
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"a must be square, got shape {a.shape}")
    if b.shape[0] != b.shape[1]:
        raise ValueError(f"b must be square, got shape {b.shape}")
    return np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b)


def kron_sum_vec(a, b) -> np.ndarray:
    """Kronecker sum a (+) b = a (x) I_d + I_d (x) b of two length-d vectors.

    Returns the (d*d, d) matrix satisfying, for any length-d vector m,
    ``kron_sum_vec(a, b) @ m == vec(outer(m, a)) + vec(outer(b, m))``.
    """
    a = _as_vector(a, "a")
    b = _as_vector(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"vectors must have equal length, got {a.shape[0]} and {b.shape[0]}")
    eye = np.eye(a.shape[0])
    return np.kron(a[:, None], eye) + np.kron(eye, b[:, None])


def vec(a) -> np.ndarray:
    """Stack the columns of a matrix into one vector: vec(a)[i + j*m] = a[i, j]."""
    return _as_matrix(a, "a").reshape(-1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`: rebuild the (rows, cols) matrix from its column stack."""
    v = _as_vector(v, "v")
    if v.shape[0] != rows * cols:
        raise ValueError(f"length {v.shape[0]} does not match {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def hilbert(d: int) -> np.ndarray:
    """Hilbert matrix of order d: H[i, j] = 1 / (i + j + 1) with zero-based indices."""
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    idx = np.arange(int(d))
    return 1.0 / (idx[:, None] + idx[None, :] + 1.0)
