"""Problem instances, column normalization and the r(x)/q(x) couple arrays."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .distances import as_nonneg, as_positive
from .errors import DomainError, SingularityError

__all__ = [
    "KL_FAMILIES",
    "REAL_FAMILIES",
    "FAMILIES",
    "TINY",
    "ProblemInstance",
    "as_nonneg_matrix",
    "as_real_matrix",
    "column_sums",
    "col_sq_sums",
    "normalize_columns",
    "forward",
    "kl_r_array",
    "kl_q_array",
    "euclid_r_array",
    "euclid_q_array",
]

KL_FAMILIES = ("smart", "emml", "hellinger", "pearson")
REAL_FAMILIES = ("euclid", "landweber")
FAMILIES = REAL_FAMILIES + KL_FAMILIES

# (Px)_i below this is treated as zero by every ratio operator
TINY = 1e-300


def as_nonneg_matrix(P, name="P"):
    """Validate a nonnegative I-by-J matrix with no zero column."""
    a = as_nonneg(P, name)
    if a.ndim != 2:
        raise DomainError(f"{name} must be two-dimensional, got shape {a.shape}")
    s = a.sum(axis=0)
    if (s <= 0).any():
        raise DomainError(f"{name} has a zero column at j={int(np.argmin(s))}")
    return a


def as_real_matrix(A, name="A"):
    """Validate a real I-by-J matrix whose columns are all nonzero."""
    a = np.asarray(A, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise DomainError(f"{name} must be a nonempty two-dimensional array")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains NaN or infinite entries")
    c = (a * a).sum(axis=0)
    if (c <= 0).any():
        raise DomainError(f"{name} has a zero column at j={int(np.argmin(c))}")
    return a


def column_sums(P):
    """``s_j = sum_i P_ij``."""
    return as_nonneg_matrix(P).sum(axis=0)


def col_sq_sums(A):
    """``c_j = sum_i A_ij**2``."""
    a = as_real_matrix(A)
    return (a * a).sum(axis=0)


def normalize_columns(P, x):
    """Rescale so every column of ``P`` sums to one, keeping ``P @ x`` fixed.

    Returns ``(P / s, s * x)`` where ``s`` are the column sums.
    """
    P = as_nonneg_matrix(P)
    x = np.asarray(x, dtype=float)
    if x.shape != (P.shape[1],):
        raise DomainError(f"x has shape {x.shape}, expected ({P.shape[1]},)")
    s = P.sum(axis=0)
    return P / s, s * x


def forward(P, x, guard=True):
    """``P @ x``; with ``guard`` raise :class:`SingularityError` for entries below ``TINY``."""
    px = P @ x
    if guard:
        bad = np.flatnonzero(~(px >= TINY))
        if bad.size:
            raise SingularityError(bad[0], px[bad[0]])
    return px


def kl_q_array(P, x):
    """``q(x)_ij = x_j P_ij``."""
    P = np.asarray(P, dtype=float)
    x = np.asarray(x, dtype=float)
    if P.shape[1:] != x.shape:
        raise DomainError(f"P has {P.shape[1]} columns but x has shape {x.shape}")
    return P * x[None, :]


def kl_r_array(P, y, x):
    """``r(x)_ij = x_j P_ij y_i / (Px)_i``; row i sums to ``y_i``."""
    P = np.asarray(P, dtype=float)
    y = np.asarray(y, dtype=float)
    px = forward(P, np.asarray(x, dtype=float))
    return kl_q_array(P, x) * (y / px)[:, None]


def euclid_q_array(A, x):
    """``q(x)_ij = A_ij x_j``."""
    return kl_q_array(A, x)


def euclid_r_array(A, b, x):
    """``r(x)_ij = A_ij x_j + (b_i - (Ax)_i) / J``; row i sums to ``b_i``."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    res = np.asarray(b, dtype=float) - A @ x
    return A * x[None, :] + res[:, None] / A.shape[1]


@dataclass(frozen=True)
class ProblemInstance:
    """Matrix, data and starting vector for one solver family.

    KL-family instances (smart, emml, hellinger, pearson) need a nonnegative
    matrix with positive column sums, positive data and a positive start.
    Euclidean instances (euclid, landweber) take any real matrix without
    zero columns and real data.
    """

    family: str
    matrix: np.ndarray
    data: np.ndarray
    start: np.ndarray
    strict_positive: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family in KL_FAMILIES:
            m = as_nonneg_matrix(self.matrix, "matrix")
            d = as_positive(self.data, "data")
            x0 = as_positive(self.start, "start")
            if (m == 0).any():
                msg = "matrix has zero entries; ratio steps may hit (Px)_i = 0"
                if self.strict_positive:
                    raise DomainError(msg)
                warnings.warn(msg, RuntimeWarning, stacklevel=3)
        else:
            m = as_real_matrix(self.matrix, "matrix")
            d = np.asarray(self.data, dtype=float)
            x0 = np.asarray(self.start, dtype=float)
            if not (np.all(np.isfinite(d)) and np.all(np.isfinite(x0))):
                raise DomainError("data and start must be finite")
        if d.shape != (m.shape[0],):
            raise DomainError(f"data has shape {d.shape}, expected ({m.shape[0]},)")
        if x0.shape != (m.shape[1],):
            raise DomainError(f"start has shape {x0.shape}, expected ({m.shape[1]},)")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "data", d)
        object.__setattr__(self, "start", x0)

    @property
    def shape(self):
        return self.matrix.shape
