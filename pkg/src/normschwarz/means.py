"""Matrix geometric mean of two positive definite matrices."""

from __future__ import annotations

import math

import numpy as np

from .linalg import PositiveDefiniteMatrix

__all__ = ["gmean", "gmean_2x2"]


def gmean(a, b) -> PositiveDefiniteMatrix:
    """Geometric mean ``A # B = A^1/2 (A^-1/2 B A^-1/2)^1/2 A^1/2``.

    Parameters
    ----------
    a, b : PositiveDefiniteMatrix or array_like
        Positive definite matrices of the same size.

    Returns
    -------
    PositiveDefiniteMatrix
        The mean, symmetrized.
    """
    a = PositiveDefiniteMatrix.coerce(a)
    b = PositiveDefiniteMatrix.coerce(b)
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    w, v = a.eig
    rt = np.sqrt(w)
    # In A's eigenbasis: A^-1/2 B A^-1/2 = diag(rt)^-1 (V* B V) diag(rt)^-1.
    bt = v.conj().T @ b.a @ v
    inner = PositiveDefiniteMatrix(bt / np.outer(rt, rt))
    mid = inner.sqrt.a * np.outer(rt, rt)
    return PositiveDefiniteMatrix(v @ mid @ v.conj().T)


def _det2(m: np.ndarray) -> float:
    return float((m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real)


def gmean_2x2(x, y) -> PositiveDefiniteMatrix:
    """Closed-form geometric mean of 2x2 positive definite matrices.

    With ``Z = X / sqrt(det X) + Y / sqrt(det Y)``::

        X # Y = (det X det Y)^(1/4) / sqrt(det Z) * Z

    Only scalar determinants are used; no eigendecomposition.
    """
    x = PositiveDefiniteMatrix.coerce(x)
    y = PositiveDefiniteMatrix.coerce(y)
    if x.n != 2 or y.n != 2:
        raise ValueError("gmean_2x2 needs 2x2 matrices")
    dx, dy = _det2(x.a), _det2(y.a)
    z = x.a / math.sqrt(dx) + y.a / math.sqrt(dy)
    coef = (dx * dy) ** 0.25 / math.sqrt(_det2(z))
    return PositiveDefiniteMatrix(coef * z)
