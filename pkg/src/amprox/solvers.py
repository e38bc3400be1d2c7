"""Iteration operators and full-solve drivers.

Euclidean family (real matrix ``A``, data ``b``, objective ``||b - Ax||^2``):

* :func:`landweber_step` -- ``x - gamma A^T (Ax - b)``;
* :func:`euclid_L_step`  -- the alternating-minimization step ``L``.

KL family (nonnegative ``P`` with unit column sums, positive data ``y``):

=============  =====================  ==========================================
operator       objective              step
=============  =====================  ==========================================
SMART  ``S``   ``KL(Px, y)``          ``x_j exp(sum_i P_ij log(y_i/(Px)_i))``
EMML   ``M``   ``KL(y, Px)``          ``x_j sum_i P_ij y_i/(Px)_i``
``T``          ``H(y, Px)``           ``x_j (sum_i P_ij sqrt(y_i/(Px)_i))**2``
``R``          ``phi2(y, Px)``        ``x_j sqrt(sum_i P_ij (y_i/(Px)_i)**2)``
=============  =====================  ==========================================

The drivers normalize the columns of ``P`` before iterating and report
the limit in the caller's coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import distances as dist
from .errors import ConfigError, DomainError
from .distances import as_positive
from .framework import AMInstance, MMInstance, PMAInstance, StoppingRule, run_af
from .model import (
    KL_FAMILIES,
    ProblemInstance,
    as_real_matrix,
    euclid_q_array,
    euclid_r_array,
    forward,
    kl_q_array,
    kl_r_array,
    normalize_columns,
)

__all__ = [
    "SolverConfig",
    "RhoEstimate",
    "Solution",
    "power_method_rho",
    "landweber_gamma_bound",
    "landweber_step",
    "gradient_descent_step",
    "quadratic_mm_step",
    "quadratic_majorizer",
    "euclid_L_step",
    "EquivTransform",
    "landweber_equiv_transform",
    "smart_step",
    "emml_step",
    "hellinger_T_step",
    "pearson_R_step",
    "STEPS",
    "objective",
    "step_distance",
    "am_instance",
    "mm_instance",
    "hellinger_prox_pma",
    "solve",
]

RHO_ITERS = 200
RHO_SAFETY = 1.01
NORMALIZED_TOL = 1e-10


class RhoEstimate(NamedTuple):
    value: float
    approximate: bool
    iterations: int


def power_method_rho(M, iters=RHO_ITERS, tol=1e-12):
    """Largest eigenvalue of a symmetric positive semidefinite matrix.

    Returns a :class:`RhoEstimate`; ``approximate`` is set when the
    Rayleigh quotient had not settled to ``tol`` (relative) after ``iters``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"power method needs a square matrix, got shape {M.shape}")
    v = np.random.default_rng(12345).uniform(0.5, 1.5, size=M.shape[0])
    v /= np.linalg.norm(v)
    lam = float(v @ M @ v)
    for it in range(1, iters + 1):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return RhoEstimate(0.0, False, it)
        v = w / nw
        new = float(v @ M @ v)
        if abs(new - lam) <= tol * max(abs(new), 1e-300):
            return RhoEstimate(new, False, it)
        lam = new
    return RhoEstimate(lam, True, iters)


def landweber_gamma_bound(A):
    """Upper bound ``2 / (1.01 rho(A^T A))`` used to validate Landweber step sizes."""
    A = as_real_matrix(A)
    rho = power_method_rho(A.T @ A).value
    return 2.0 / (RHO_SAFETY * rho)


def landweber_step(A, b, x, gamma):
    """One Landweber step ``x - gamma A^T (Ax - b)``; needs ``0 < gamma < 2/rho(A^T A)``."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    rho = float(np.linalg.norm(A, 2)) ** 2
    if not (0 < gamma < 2.0 / rho):
        raise ConfigError(f"gamma={gamma!r} outside (0, 2/rho(A^T A)) = (0, {2.0 / rho:.6g})")
    return x - gamma * (A.T @ (A @ x - np.asarray(b, dtype=float)))


def gradient_descent_step(grad_f, x, gamma):
    x = np.asarray(x, dtype=float)
    return x - gamma * np.asarray(grad_f(x), dtype=float)


def quadratic_mm_step(grad_f, solveB, x):
    """Minimize the quadratic majorizer ``f(z) + <grad f(z), x - z> + (x - z)^T B (x - z) / 2``.

    ``solveB(v)`` must return ``u`` with ``B u = v`` for symmetric positive definite B.
    """
    x = np.asarray(x, dtype=float)
    return x - np.asarray(solveB(np.asarray(grad_f(x), dtype=float)), dtype=float)


def quadratic_majorizer(f, grad_f, B):
    """MM instance from the quadratic upper bound with curvature matrix ``B``."""
    B = np.asarray(B, dtype=float)

    def g(x, z):
        dx = np.asarray(x, dtype=float) - np.asarray(z, dtype=float)
        return float(f(z) + np.dot(grad_f(z), dx) + 0.5 * dx @ B @ dx)

    return MMInstance(f=f, g=g, step=lambda z: quadratic_mm_step(grad_f, lambda v: np.linalg.solve(B, v), z))


def euclid_L_step(A, b, x):
    """``(Lx)_j = x_j + sum_i A_ij (b - Ax)_i / (J c_j)`` with ``c_j = sum_i A_ij**2``."""
    A = as_real_matrix(A)
    x = np.asarray(x, dtype=float)
    c = (A * A).sum(axis=0)
    return x + (A.T @ (np.asarray(b, dtype=float) - A @ x)) / (A.shape[1] * c)


@dataclass(frozen=True)
class EquivTransform:
    """Rescaling that turns the L iteration into Landweber with ``gamma = 1``.

    ``B = A diag(sqrt(beta))`` with ``beta_j = 1/(J c_j)``; ``z = x / sqrt(beta)``.
    """

    B: np.ndarray
    beta: np.ndarray

    def forward(self, x):
        return np.asarray(x, dtype=float) / np.sqrt(self.beta)

    def back(self, z):
        return np.asarray(z, dtype=float) * np.sqrt(self.beta)


def landweber_equiv_transform(A, b=None):
    A = as_real_matrix(A)
    c = (A * A).sum(axis=0)
    beta = 1.0 / (A.shape[1] * c)
    return EquivTransform(B=A * np.sqrt(beta)[None, :], beta=beta)


def _check_normalized(P):
    P = np.asarray(P, dtype=float)
    s = P.sum(axis=0)
    if np.max(np.abs(s - 1.0)) > NORMALIZED_TOL:
        raise DomainError("P must have unit column sums; call normalize_columns first")
    return P


def smart_step(P, y, x):
    """SMART operator ``S``."""
    P = _check_normalized(P)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    log_ratio = np.log(y) - np.log(forward(P, x))
    return x * np.exp(P.T @ log_ratio)


def emml_step(P, y, x):
    """EMML operator ``M``; preserves total mass ``sum(Mx) = sum(y)``."""
    P = _check_normalized(P)
    x = np.asarray(x, dtype=float)
    return x * (P.T @ (np.asarray(y, dtype=float) / forward(P, x)))


def hellinger_T_step(P, y, x):
    """Hellinger operator ``T``."""
    P = _check_normalized(P)
    x = np.asarray(x, dtype=float)
    return x * (P.T @ np.sqrt(np.asarray(y, dtype=float) / forward(P, x))) ** 2


def pearson_R_step(P, y, x):
    """Pearson operator ``R``."""
    P = _check_normalized(P)
    x = np.asarray(x, dtype=float)
    return x * np.sqrt(P.T @ (np.asarray(y, dtype=float) / forward(P, x)) ** 2)


STEPS = {
    "smart": smart_step,
    "emml": emml_step,
    "hellinger": hellinger_T_step,
    "pearson": pearson_R_step,
}


def objective(family, M, data):
    """The function each family's iteration decreases, as a callable of ``x``."""
    M = np.asarray(M, dtype=float)
    data = np.asarray(data, dtype=float)
    if family in ("euclid", "landweber"):
        return lambda x: float(np.sum((data - M @ x) ** 2))
    table = {
        "smart": lambda x: dist.kl_vec(M @ x, data),
        "emml": lambda x: dist.kl_vec(data, M @ x),
        "hellinger": lambda x: dist.hellinger(data, M @ x),
        "pearson": lambda x: dist.pearson(data, M @ x),
    }
    try:
        return table[family]
    except KeyError:
        raise ConfigError(f"unknown family {family!r}") from None


def step_distance(family, M=None):
    """Distance ``D(x_prev, x)`` bounding the per-step objective decrease from below.

    SMART ``KL(x_prev, x)``, EMML ``KL(x, x_prev)``, Hellinger ``H(x_prev, x)``,
    Pearson ``phi2(x, x_prev)``, Euclid ``J sum_j c_j (x_j - x_prev_j)**2``,
    Landweber ``||x - x_prev||^2``.
    """
    if family == "euclid":
        A = as_real_matrix(M)
        w = A.shape[1] * (A * A).sum(axis=0)
        return lambda xp, x: float(np.sum(w * (np.asarray(x) - np.asarray(xp)) ** 2))
    table = {
        "smart": lambda xp, x: dist.kl_vec(xp, x),
        "emml": lambda xp, x: dist.kl_vec(x, xp),
        "hellinger": lambda xp, x: dist.hellinger(xp, x),
        "pearson": lambda xp, x: dist.pearson(x, xp),
        "landweber": lambda xp, x: float(np.sum((np.asarray(x) - np.asarray(xp)) ** 2)),
    }
    try:
        return table[family]
    except KeyError:
        raise ConfigError(f"unknown family {family!r}") from None


# ---------------------------------------------------------------------------
# AM and MM formulations
# ---------------------------------------------------------------------------


def _masked_pearson(r, q, mask):
    return float(np.sum(np.where(mask, (r - q) ** 2 / np.where(mask, q, 1.0), 0.0)))


def am_instance(family, M, data):
    """Alternating-minimization coupling whose x-updates reproduce the family's step.

    The y-variable is an I-by-J array ``r`` whose rows sum to the data; the
    best response is ``r(x)``. KL families expect unit column sums.
    """
    M = np.asarray(M, dtype=float)
    data = np.asarray(data, dtype=float)
    if family == "euclid":
        A = as_real_matrix(M)
        J = A.shape[1]
        c = (A * A).sum(axis=0)
        return AMInstance(
            phi=lambda x, r: J * dist.sq_euclid(r, euclid_q_array(A, x)),
            argmin_x=lambda r: (A * r).sum(axis=0) / c,
            argmin_y=lambda x: euclid_r_array(A, data, x),
        )
    if family not in KL_FAMILIES:
        raise ConfigError(f"no AM formulation for family {family!r}")
    P = _check_normalized(M)
    mask = P > 0
    ry = lambda x: kl_r_array(P, data, x)  # noqa: E731

    if family == "smart":
        def argmin_x(r):
            with np.errstate(divide="ignore"):
                logs = np.where(mask, np.log(np.where(mask, r, 1.0) / np.where(mask, P, 1.0)), 0.0)
            return np.exp((P * logs).sum(axis=0))

        return AMInstance(lambda x, r: dist.kl_vec(kl_q_array(P, x), r), argmin_x, ry)
    if family == "emml":
        return AMInstance(lambda x, r: dist.kl_vec(r, kl_q_array(P, x)), lambda r: r.sum(axis=0), ry)
    if family == "hellinger":
        return AMInstance(
            lambda x, r: dist.hellinger(r, kl_q_array(P, x)),
            lambda r: np.sqrt(r * P).sum(axis=0) ** 2,
            ry,
        )
    return AMInstance(
        lambda x, r: _masked_pearson(r, kl_q_array(P, x), mask),
        lambda r: np.sqrt(np.where(mask, r * r / np.where(mask, P, 1.0), 0.0).sum(axis=0)),
        ry,
    )


def mm_instance(family, M, data):
    """Majorization form: ``g(x | z)`` written out explicitly, step = the operator."""
    M = np.asarray(M, dtype=float)
    data = np.asarray(data, dtype=float)
    f = objective(family, M, data)
    if family == "euclid":
        A = as_real_matrix(M)
        J = A.shape[1]
        g = lambda x, z: J * dist.sq_euclid(euclid_r_array(A, data, z), euclid_q_array(A, x))  # noqa: E731
        return MMInstance(f, g, lambda z: euclid_L_step(A, data, z))
    if family not in KL_FAMILIES:
        raise ConfigError(f"no MM formulation for family {family!r}")
    P = _check_normalized(M)
    mask = P > 0
    dfun = {
        "smart": lambda r, q: dist.kl_vec(q, r),
        "emml": lambda r, q: dist.kl_vec(r, q),
        "hellinger": lambda r, q: dist.hellinger(r, q),
        "pearson": lambda r, q: _masked_pearson(r, q, mask),
    }[family]
    g = lambda x, z: dfun(kl_r_array(P, data, z), kl_q_array(P, x))  # noqa: E731
    op = STEPS[family]
    return MMInstance(f, g, lambda z: op(P, data, z))


def hellinger_prox_pma(a, b):
    """Proximal method for ``f(x) = sum_j KL(b_j, a_j x_j)`` with the Hellinger distance as ``d``.

    The prox step is separable: with ``u = sqrt(x)`` it solves
    ``(1 + a) u**2 - sqrt(z) u - b = 0``. The minimizer of ``f`` is ``b / a``.
    """
    a = as_positive(a, "a")
    b = as_positive(b, "b")

    def prox(z):
        rz = np.sqrt(np.asarray(z, dtype=float))
        u = (rz + np.sqrt(rz * rz + 4.0 * (1.0 + a) * b)) / (2.0 * (1.0 + a))
        return u * u

    return PMAInstance(f=lambda x: dist.kl_vec(b, a * np.asarray(x, dtype=float)), d=dist.hellinger, prox_step=prox)


# ---------------------------------------------------------------------------
# full solves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """Step size (Landweber only) and stopping rule."""

    gamma: float | None = None
    rule: StoppingRule = field(default_factory=StoppingRule)


@dataclass
class Solution:
    """Result of :func:`solve`.

    ``trace`` is in the solver's internal coordinates (normalized columns for
    KL families); ``limit`` is the final iterate mapped back to the
    caller's coordinates.
    """

    family: str
    trace: object
    matrix: np.ndarray
    data: np.ndarray
    col_scale: np.ndarray
    gamma: float | None = None

    @property
    def limit(self):
        return self.trace.final / self.col_scale

    @property
    def converged(self):
        return self.trace.status == "converged"


def _trace_slacks(family, M, data, f, D):
    sl = {"first_monotonicity": lambda k, xp, x: f(xp) - f(x) - D(xp, x)}
    total = float(np.sum(data)) if family in KL_FAMILIES else None
    if family == "emml":
        sl["mass"] = lambda k, xp, x: -abs(float(np.sum(x)) - total)
    elif family in ("smart", "hellinger"):
        sl["mass"] = lambda k, xp, x: total - float(np.sum(x))
    elif family == "pearson":
        sl["mass"] = lambda k, xp, x: float(np.sum(x)) - total
    if family == "landweber":
        sl = {"descent": lambda k, xp, x: f(xp) - f(x)}
    return sl


def solve(problem, config=None, *, record_slacks=True):
    """Run the family's iteration on ``problem`` under ``config``."""
    if not isinstance(problem, ProblemInstance):
        raise TypeError("solve expects a ProblemInstance")
    config = config or SolverConfig()
    fam = problem.family
    gamma = None
    if fam in KL_FAMILIES:
        M, x0 = normalize_columns(problem.matrix, problem.start)
        scale = problem.matrix.sum(axis=0)
        op = STEPS[fam]
        step = lambda z: op(M, problem.data, z)  # noqa: E731
    else:
        M, x0 = problem.matrix, problem.start
        scale = np.ones(M.shape[1])
        if fam == "euclid":
            step = lambda z: euclid_L_step(M, problem.data, z)  # noqa: E731
        else:
            bound = landweber_gamma_bound(M)
            # default 1/rho, half the admissible interval
            gamma = config.gamma if config.gamma is not None else 0.5 * bound
            if not (0 < gamma < bound):
                raise ConfigError(
                    f"gamma={gamma!r} violates 0 < gamma < 2/rho(A^T A) "
                    f"(estimated bound {bound:.6g} with safety factor {RHO_SAFETY})"
                )
            g = gamma
            step = lambda z: z - g * (M.T @ (M @ z - problem.data))  # noqa: E731
    f = objective(fam, M, problem.data)
    D = step_distance(fam, M)
    slacks = _trace_slacks(fam, M, problem.data, f, D) if record_slacks else None
    trace = run_af(step, f, x0, config.rule, distance=D, slacks=slacks)
    return Solution(fam, trace, M, problem.data, scale, gamma)
