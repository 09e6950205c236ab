"""Finite-dimensional real Hilbert-space primitives.

Points are plain 1-D ``numpy`` arrays of ``float64``; :func:`as_vector` is the
validating constructor used at API boundaries. Linear operators between the
two spaces are dense matrices wrapped in :class:`DenseOperator`, whose adjoint
is exactly the transpose action.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DenseOperator",
    "adjoint_apply",
    "apply",
    "as_vector",
    "inner",
    "norm",
    "operator_norm_sq_upper",
]


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Validate ``x`` as a finite 1-D real vector and return it as float64."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got array of shape {v.shape}")
    if v.size < 1:
        raise ValueError("vectors must have dimension >= 1")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector components must be finite")
    if dim is not None and v.size != dim:
        raise ValueError(f"expected dimension {dim}, got {v.size}")
    return v


def inner(u, v) -> float:
    """Euclidean inner product of two vectors of equal dimension."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(u @ v)


def norm(u) -> float:
    """Norm induced by :func:`inner`."""
    return float(np.linalg.norm(np.asarray(u, dtype=float)))


class DenseOperator:
    """Dense linear operator mapping dim-n vectors to dim-m vectors.

    The adjoint is the transpose action, so ``<A x, y> == <x, A* y>`` holds
    exactly up to floating-point rounding.
    """

    def __init__(self, entries):
        entries = np.asarray(entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError(f"operator entries must be a 2-D matrix, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("operator entries must be finite")
        self.entries = entries

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"operator expects dimension {self.n}, got {x.shape}")
        return self.entries @ x

    def adjoint_apply(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.m,):
            raise ValueError(f"adjoint expects dimension {self.m}, got {y.shape}")
        return self.entries.T @ y

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseOperator):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            np.array_equal(self.entries, other.entries)
        )

    def __repr__(self) -> str:
        return f"DenseOperator(shape={self.entries.shape})"


def apply(A: DenseOperator, x) -> np.ndarray:
    """Matrix-vector product ``A x``."""
    return A.apply(x)


def adjoint_apply(A: DenseOperator, y) -> np.ndarray:
    """Transpose action ``A* y``."""
    return A.adjoint_apply(y)


def operator_norm_sq_upper(A: DenseOperator, iters: int = 200, safety: float = 1.01) -> float:
    """Upper bound on the squared spectral norm of ``A`` via power iteration.

    Runs ``iters`` power-iteration steps on the Gram matrix ``A^T A`` from a
    deterministic start vector and returns the Rayleigh-quotient estimate
    multiplied by ``safety``. Step sizes chosen below ``1 / U`` with
    ``U = operator_norm_sq_upper(A)`` then stay below ``1 / ||A||^2``, the
    safety factor absorbing residual non-convergence of the power method.

    A zero operator returns ``safety * tiny`` for the smallest positive normal
    float, so that ``1 / U`` remains finite.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if safety < 1.0:
        raise ValueError("safety must be >= 1")
    gram = A.entries.T @ A.entries
    v = _start_vector(A.entries)
    if v is None:
        return safety * float(np.finfo(float).tiny)
    v = v / np.linalg.norm(v)
    for _ in range(iters):
        w = gram @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
    lam = float(v @ (gram @ v))
    return safety * lam


def _start_vector(entries: np.ndarray) -> np.ndarray | None:
    """Deterministic power-iteration start; None for the zero operator.

    All-ones with a graded tilt (so symmetric structure cannot trap the
    iteration in an invariant subspace orthogonal to the top eigenvector),
    falling back through basis vectors when that probe lies in the kernel.
    """
    n = entries.shape[1]
    v = 1.0 + 1e-6 * np.arange(n)
    if np.linalg.norm(entries @ v) > 0.0:
        return v
    column_norms = np.linalg.norm(entries, axis=0)
    for j in range(n):
        if column_norms[j] > 0.0:
            e = np.zeros(n)
            e[j] = 1.0
            return e
    return None
