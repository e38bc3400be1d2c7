"""Divergences on nonnegative vectors and the identities they satisfy.

Every function accepts array-likes of any (matching) shape and sums over all
entries, so the same code serves vectors ``x`` and I-by-J couple arrays.
Inputs are validated: NaN, infinities and (where relevant) negative entries
raise :class:`~amprox.errors.DomainError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .report import CheckReport, merge

__all__ = [
    "PhiSpec",
    "HELLINGER_PHI",
    "ENTROPY_PHI",
    "as_nonneg",
    "as_positive",
    "kl",
    "kl_vec",
    "kl_split",
    "hellinger",
    "pearson",
    "weighted_sq",
    "sq_euclid",
    "bregman",
    "phi_distance",
    "validate_phi",
    "shannon_entropy",
]


def _as_real(x, name):
    a = np.asarray(x, dtype=float)
    if a.size == 0:
        raise DomainError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains NaN or infinite entries")
    return a


def as_nonneg(x, name="x"):
    """Return ``x`` as a float array, rejecting NaN/inf and negative entries."""
    a = _as_real(x, name)
    if (a < 0).any():
        raise DomainError(f"{name} has a negative entry at {np.unravel_index(np.argmin(a), a.shape)}")
    return a


def as_positive(x, name="x"):
    a = _as_real(x, name)
    if (a <= 0).any():
        raise DomainError(f"{name} must be strictly positive")
    return a


def _pair(x, z, check, names=("x", "z")):
    a = check(x, names[0])
    b = check(z, names[1])
    if a.shape != b.shape:
        raise DomainError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def _kl_terms(x, z):
    # 0*log(0/t) is exactly 0; s*log(s/0) is +inf
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(x > 0, x * np.log(x / np.where(z > 0, z, 1.0)), 0.0) + z - x
    return np.where((x > 0) & (z == 0), np.inf, t)


def kl(s, t):
    """Kullback-Leibler distance ``s log(s/t) + t - s`` of two nonnegative scalars.

    ``kl(0, t) == t`` and ``kl(s, 0) == inf`` for ``s > 0``.
    """
    s = float(s)
    t = float(t)
    if math.isnan(s) or math.isnan(t) or s < 0 or t < 0 or math.isinf(s) or math.isinf(t):
        raise DomainError(f"kl needs finite nonnegative arguments, got ({s}, {t})")
    if s == 0.0:
        return t
    if t == 0.0:
        return math.inf
    return s * math.log(s / t) + t - s


def kl_vec(x, z):
    """Componentwise KL distance, summed. May return ``inf``."""
    a, b = _pair(x, z, as_nonneg)
    return float(np.sum(_kl_terms(a, b)))


def kl_split(x, z):
    """Split ``KL(x, z)`` into a mass part and a shape part.

    Returns ``(total, mass_part, shape_part)`` with
    ``mass_part = KL(x+, z+)`` and ``shape_part = KL(x, (x+/z+) z)``;
    ``total == mass_part + shape_part``.
    """
    a, b = _pair(x, z, as_nonneg)
    zp = float(b.sum())
    if zp <= 0:
        raise DomainError("kl_split needs z with positive total mass")
    xp = float(a.sum())
    return kl_vec(a, b), kl(xp, zp), kl_vec(a, (xp / zp) * b)


def hellinger(x, z):
    """Hellinger distance ``sum (sqrt(x) - sqrt(z))**2``; symmetric."""
    a, b = _pair(x, z, as_nonneg)
    return float(np.sum((np.sqrt(a) - np.sqrt(b)) ** 2))


def pearson(x, z):
    """Pearson's phi-squared distance ``sum (x - z)**2 / z``; z must be positive."""
    a = as_nonneg(x, "x")
    b = as_positive(z, "z")
    if a.shape != b.shape:
        raise DomainError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sum((a - b) ** 2 / b))


def weighted_sq(x, z, w):
    """``sum w_j (x_j - z_j)**2`` for real ``x``, ``z`` and positive weights ``w``."""
    a, b = _pair(x, z, _as_real)
    c = as_positive(w, "w")
    if c.shape != a.shape:
        raise DomainError(f"weight shape {c.shape} does not match {a.shape}")
    return float(np.sum(c * (a - b) ** 2))


def sq_euclid(x, z):
    """Squared Euclidean distance ``E(x, z)`` of real arrays."""
    a, b = _pair(x, z, _as_real)
    return float(np.sum((a - b) ** 2))


def bregman(h, grad_h, x, z):
    """Bregman distance ``h(x) - h(z) - <grad h(z), x - z>``."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise DomainError(f"shape mismatch: {x.shape} vs {z.shape}")
    if np.isnan(x).any() or np.isnan(z).any():
        raise DomainError("bregman got NaN input")
    g = np.asarray(grad_h(z), dtype=float)
    return float(h(x) - h(z) - np.sum(g * (x - z)))


@dataclass(frozen=True)
class PhiSpec:
    """Kernel of a phi-distance: ``phi``, its derivative, and ``phi''(1)``.

    Construction does not enforce ``phi(1) = phi'(1) = 0``; use
    :func:`validate_phi` so that bad kernels can be reported rather than refused.
    """

    phi: Callable[[float], float]
    dphi: Callable[[float], float]
    ddphi1: float
    name: str = "phi"

    def __post_init__(self):
        if not (self.ddphi1 > 0 and math.isfinite(self.ddphi1)):
            raise DomainError("phi''(1) must be a positive finite number")


HELLINGER_PHI = PhiSpec(
    phi=lambda t: (np.sqrt(t) - 1.0) ** 2,
    dphi=lambda t: 1.0 - 1.0 / np.sqrt(t),
    ddphi1=0.5,
    name="hellinger",
)

ENTROPY_PHI = PhiSpec(
    phi=lambda t: t * np.log(t) - t + 1.0,
    dphi=lambda t: np.log(t),
    ddphi1=1.0,
    name="entropy",
)


def phi_distance(spec, x, z):
    """``d_phi(x, z) = sum z_j phi(x_j / z_j)`` on strictly positive vectors."""
    a, b = _pair(x, z, as_positive)
    return float(np.sum(b * np.asarray(spec.phi(a / b), dtype=float)))


PHI_MIN_T = 0.01


def validate_phi(spec, grid, tol=1e-12, convexity_tol=1e-9):
    """Check the kernel conditions of a phi-distance on a grid of t > 0.

    Conditions, each reported as a separate part:

    * ``phi(t) >= 0``;
    * ``phi''(1)(1 - 1/t) <= phi'(t)`` and ``phi'(t) <= phi''(1) log t``;
    * ``phi(1) = phi'(1) = 0``;
    * convexity, via nonnegative second divided differences.

    Grid points below 0.01 are dropped; t = 1 is always included.
    """
    t = np.asarray(grid, dtype=float).ravel()
    if t.size == 0 or not np.all(np.isfinite(t)) or (t <= 0).any():
        raise DomainError("grid must be nonempty and strictly positive")
    dropped = int((t < PHI_MIN_T).sum())
    t = np.unique(np.append(t[t >= PHI_MIN_T], 1.0))
    notes = f"t restricted to [{PHI_MIN_T}, inf)" + (f"; dropped {dropped} points" if dropped else "")

    phi = np.asarray(spec.phi(t), dtype=float)
    dphi = np.asarray(spec.dphi(t), dtype=float)
    c = spec.ddphi1
    parts = [
        CheckReport.from_slacks("phi_nonneg", phi, tol),
        CheckReport.from_slacks("dphi_lower_bracket", dphi - c * (1.0 - 1.0 / t), tol),
        CheckReport.from_slacks("dphi_upper_bracket", c * np.log(t) - dphi, tol),
        CheckReport.from_slacks(
            "normalized_at_one",
            [-abs(float(spec.phi(1.0))), -abs(float(spec.dphi(1.0)))],
            tol,
        ),
    ]
    if t.size >= 3:
        slopes = np.diff(phi) / np.diff(t)
        second = np.diff(slopes) / (0.5 * (t[2:] - t[:-2]))
        parts.append(CheckReport.from_slacks("convex", second, convexity_tol))
    report = merge(f"validate_phi[{spec.name}]", parts, notes=notes)
    failing = [p.name for p in parts if not p.passed]
    if failing:
        report = CheckReport(report.name, report.samples, report.worst_slack, report.mean_slack,
                             report.tolerance, False, True, notes + "; failed: " + ", ".join(failing),
                             report.parts)
    return report


def shannon_entropy(x):
    """``-sum x_j log x_j`` with ``0 log 0 = 0``."""
    a = as_nonneg(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(-np.sum(np.where(a > 0, a * np.log(np.where(a > 0, a, 1.0)), 0.0)))
