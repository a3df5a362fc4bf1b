"""Truncated Fock-space operators and the small exact matrix toolkit.

Operators are dense complex numpy arrays over the basis {|0>, ..., |N-1>};
states are complex N-vectors. Identities involving raising operators are only
exact away from the truncation edge, so comparisons support an interior block
that excludes the top few levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, DomainError, ShapeError, StructureError

TAIL_LEVELS = 4


def ensure_operator(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"operator must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("operator has non-finite entries")
    return a


def ensure_state(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1:
        raise ShapeError(f"state must be a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError("state has non-finite entries")
    return v


@dataclass(frozen=True)
class OperatorSet:
    """The ladder, su(1,1), and quadrature operators at one dimension."""

    dim: int
    a: np.ndarray
    a_dag: np.ndarray
    k_plus: np.ndarray
    k_minus: np.ndarray
    k_zero: np.ndarray
    x: np.ndarray
    p: np.ndarray


def build_operator_set(dim: int) -> OperatorSet:
    """Populate a, a_dag, K_plus, K_minus, K_zero, x, p at the given dimension.

    a[n-1, n] = sqrt(n); K_plus = a_dag^2/2, K_minus = a^2/2,
    K_zero = diag(n/2 + 1/4); x = (a + a_dag)/sqrt(2), p = i(a_dag - a)/sqrt(2).
    """
    if dim < 4:
        raise DimensionError(f"dim must be >= 4, got {dim}")
    n = np.arange(dim)
    a = np.zeros((dim, dim), dtype=complex)
    a[n[:-1], n[1:]] = np.sqrt(n[1:])
    a_dag = a.conj().T.copy()
    k_plus = a_dag @ a_dag / 2
    k_minus = a @ a / 2
    k_zero = np.diag((n / 2 + 0.25).astype(complex))
    x = (a + a_dag) / math.sqrt(2)
    p = 1j * (a_dag - a) / math.sqrt(2)
    return OperatorSet(dim, a, a_dag, k_plus, k_minus, k_zero, x, p)


@lru_cache(maxsize=8)
def cached_operator_set(dim: int) -> OperatorSet:
    """Shared read-only OperatorSet per dimension; callers must not mutate."""
    return build_operator_set(dim)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = ensure_operator(a)
    b = ensure_operator(b)
    if a.shape != b.shape:
        raise ShapeError(f"dim mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def adjoint(a: np.ndarray) -> np.ndarray:
    return ensure_operator(a).conj().T.copy()


def apply(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    a = ensure_operator(a)
    v = ensure_state(v)
    if a.shape[1] != v.shape[0]:
        raise ShapeError(f"dim mismatch: {a.shape} vs {v.shape}")
    return a @ v


def frobenius_distance(a: np.ndarray, b: np.ndarray, exclude_top: int = 0) -> float:
    """Frobenius norm of A - B, optionally on the interior block only.

    exclude_top drops that many of the highest basis levels from both rows
    and columns before taking the norm.
    """
    a = ensure_operator(a)
    b = ensure_operator(b)
    if a.shape != b.shape:
        raise ShapeError(f"dim mismatch: {a.shape} vs {b.shape}")
    if exclude_top < 0 or exclude_top >= a.shape[0]:
        raise ShapeError(f"exclude_top={exclude_top} out of range for dim {a.shape[0]}")
    keep = a.shape[0] - exclude_top
    return float(np.linalg.norm(a[:keep, :keep] - b[:keep, :keep]))


def interior_norm(a: np.ndarray, exclude_top: int = 3) -> float:
    keep = a.shape[0] - exclude_top
    return float(np.linalg.norm(a[:keep, :keep]))


def nilpotent_exp(a: np.ndarray, bandwidth: int) -> np.ndarray:
    """Exponential of a strictly one-sided banded (hence nilpotent) matrix.

    The matrix must have every nonzero entry at offset >= bandwidth on a
    single triangular side; the finite Taylor sum of ceil(dim/bandwidth)
    terms is then exact up to rounding.
    """
    a = ensure_operator(a)
    if bandwidth < 1:
        raise StructureError(f"bandwidth must be >= 1, got {bandwidth}")
    dim = a.shape[0]
    rows, cols = np.nonzero(a)
    if rows.size:
        offsets = rows - cols
        if np.all(offsets >= bandwidth):
            pass
        elif np.all(offsets <= -bandwidth):
            pass
        else:
            raise StructureError(
                f"matrix is not strictly banded on one side with bandwidth {bandwidth}"
            )
    terms = math.ceil(dim / bandwidth)
    out = np.eye(dim, dtype=complex)
    power = np.eye(dim, dtype=complex)
    for k in range(1, terms + 1):
        power = power @ a / k
        out += power
    return out


def diagonal_power(base: float, d: np.ndarray) -> np.ndarray:
    """base ** D for a diagonal D, entrywise on the diagonal."""
    if base <= 0:
        raise DomainError(f"base must be positive, got {base}")
    d = ensure_operator(d)
    off = d - np.diag(np.diag(d))
    if np.any(off != 0):
        raise StructureError("diagonal_power requires a diagonal matrix")
    return np.diag(np.power(base, np.real(np.diag(d)))).astype(complex)


def tail_support(v: np.ndarray, levels: int = TAIL_LEVELS) -> float:
    """Fraction of squared magnitude living in the top `levels` basis levels."""
    v = ensure_state(v)
    total = float(np.sum(np.abs(v) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(v[-levels:]) ** 2)) / total


def basis_state(dim: int, n: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise ShapeError(f"basis index {n} out of range for dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v
