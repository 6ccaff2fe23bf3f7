"""Lower-triangular Toeplitz algebra on first columns.

A lower-triangular Toeplitz matrix is fully described by its first
column ``(q_0, ..., q_{M-1})``. Products of such matrices are again
lower-triangular Toeplitz, and their first columns are truncated
convolutions, so nothing here builds an ``M x M`` matrix except
:func:`dense_exp_oracle`, which exists as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, RangeError, SingularMatrixError

_EXP_MAX = math.log(np.finfo(float).max)
DENSE_ORACLE_MAX_SIZE = 64


@dataclass(frozen=True)
class ToeplitzLT:
    """Lower-triangular Toeplitz matrix stored by its first column."""

    first_column: np.ndarray

    def __post_init__(self):
        col = np.array(self.first_column, dtype=float).reshape(-1)
        if col.size < 1:
            raise DomainError("a Toeplitz column needs at least one entry")
        if not np.all(np.isfinite(col)):
            raise DomainError("Toeplitz column entries must be finite")
        col.setflags(write=False)
        object.__setattr__(self, "first_column", col)

    @property
    def size(self) -> int:
        return self.first_column.size

    def __len__(self):
        return self.size

    def scaled(self, factor: float) -> "ToeplitzLT":
        return ToeplitzLT(factor * self.first_column)

    def to_dense(self) -> np.ndarray:
        m = self.size
        out = np.zeros((m, m))
        for k, qk in enumerate(self.first_column):
            out += qk * np.eye(m, k=-k)
        return out


def _column(q) -> np.ndarray:
    if isinstance(q, ToeplitzLT):
        return q.first_column
    return ToeplitzLT(q).first_column


def convolve_columns(a, b) -> np.ndarray:
    """First column of the product of two lower-triangular Toeplitz matrices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = min(a.size, b.size)
    return np.convolve(a[:m], b[:m])[:m]


def exp_first_column(q) -> np.ndarray:
    """First column of ``exp(Q)`` for lower-triangular Toeplitz ``Q``.

    Uses the recursion ``x_0 = exp(q_0)``,
    ``x_n = (1/n) sum_{j=1}^{n} j q_j x_{n-j}``, which is the coefficient
    recursion of the power series ``exp(sum_k q_k z^k)``. Cost is O(M^2).
    """
    col = _column(q)
    if col[0] > _EXP_MAX:
        raise RangeError(f"exp({col[0]}) overflows double precision")
    m = col.size
    x = np.empty(m)
    x[0] = math.exp(col[0])
    if m == 1:
        return x
    jq = np.arange(m) * col
    for n in range(1, m):
        # sum_{j=1}^{n} j q_j x_{n-j}
        x[n] = np.dot(jq[1:n + 1], x[n - 1::-1]) / n
    return x


def l1_exp(q) -> float:
    """Sum of the first column of ``exp(Q)``.

    This is the coverage summand ``sum_{n<M} (-s)^n/n! L^(n)(s)``. It
    coincides with the induced 1-norm whenever every entry of the column is
    non-negative, which holds for the physical columns built in this
    package.
    """
    col = _column(q)
    if col.size == 1:
        if col[0] > _EXP_MAX:
            raise RangeError(f"exp({col[0]}) overflows double precision")
        return math.exp(col[0])
    return float(np.sum(exp_first_column(col)))


def inv_first_column(q) -> np.ndarray:
    """First column of ``Q^{-1}`` by forward substitution."""
    col = _column(q)
    q0 = col[0]
    if q0 == 0.0:
        raise SingularMatrixError("Toeplitz matrix with zero diagonal is singular")
    m = col.size
    y = np.empty(m)
    y[0] = 1.0 / q0
    for n in range(1, m):
        y[n] = -np.dot(col[1:n + 1], y[n - 1::-1]) / q0
    return y


def l1_inv(q) -> float:
    """Sum of the first column of ``Q^{-1}``."""
    return float(np.sum(inv_first_column(q)))


def nilpotent_power_l1(q, n: int) -> float:
    """Column sum of ``(Q - q_0 I)^n``.

    Computed by ``n`` truncated convolutions with ``(0, q_1, ..., q_{M-1})``.
    Powers ``n >= M`` vanish identically.
    """
    col = _column(q)
    n = int(n)
    if n < 0:
        raise DomainError(f"power must be non-negative, got {n}")
    m = col.size
    if n == 0:
        return 1.0
    if n >= m:
        return 0.0
    shifted = col.copy()
    shifted[0] = 0.0
    power = np.zeros(m)
    power[0] = 1.0
    for _ in range(n):
        power = convolve_columns(power, shifted)
    return float(np.sum(power))


def dense_exp_oracle(q) -> np.ndarray:
    """Dense ``exp(Q)`` by scaling and squaring around a Taylor core.

    Independent of the column recursion; meant for tests. Limited to
    ``M <= 64``.
    """
    col = _column(q)
    m = col.size
    if m > DENSE_ORACLE_MAX_SIZE:
        raise DomainError(f"dense oracle limited to M <= {DENSE_ORACLE_MAX_SIZE}, got {m}")
    a = ToeplitzLT(col).to_dense()
    norm = np.max(np.sum(np.abs(a), axis=0))
    squarings = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0.5 else 0
    a = a / 2.0 ** squarings
    result = np.eye(m)
    term = np.eye(m)
    for k in range(1, 60):
        term = term @ a / k
        result = result + term
        if np.max(np.abs(term)) <= 1e-18 * np.max(np.abs(result)):
            break
    for _ in range(squarings):
        result = result @ result
    return result
