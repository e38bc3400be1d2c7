"""Numerical checks of the identities, inequalities and limit characterizations.

Residual checks return plain floats (relative residuals); inequality checks
return :class:`~amprox.report.CheckReport`. Oracles here are deliberately
independent of the iteration code: closed-form derivatives with bisection,
golden-section search, pseudo-inverse projections and grid search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, nnls

from . import distances as dist
from .distances import HELLINGER_PHI
from .errors import DomainError, OracleUnavailable
from .framework import StoppingRule, check_summa2, run_af
from .model import (
    KL_FAMILIES,
    as_real_matrix,
    euclid_q_array,
    euclid_r_array,
    kl_q_array,
    kl_r_array,
)
from .report import CheckReport, merge
from .solvers import (
    euclid_L_step,
    hellinger_T_step,
    mm_instance,
    objective,
    pearson_R_step,
    smart_step,
    emml_step,
    step_distance,
)

__all__ = [
    "OracleSolution",
    "rel_residual",
    "pythagorean_smart",
    "pythagorean_emml",
    "pythagorean_euclid",
    "r_array_distance_residual",
    "pythagorean_hellinger",
    "pythagorean_pearson",
    "mass_slack",
    "contraction_slacks",
    "first_monotonicity",
    "second_monotonicity",
    "at_induced_prox_check",
    "limit_characterization_smart",
    "limit_characterization_euclid",
    "hrr_probe",
    "summa2_probe",
    "euclid_summa2_check",
    "coincidence_probe",
    "emml_start_dependence_probe",
    "oracle_minimize",
    "IDENTITY_TOL",
    "MONO_TOL",
    "SECOND_MONO_TOL",
    "LIMIT_TOL",
]

IDENTITY_TOL = 1e-10
MONO_TOL = 1e-10
SECOND_MONO_TOL = 1e-8
LIMIT_TOL = 1e-4
GRID_POINTS = 10_000


def rel_residual(lhs, rhs):
    """``|lhs - rhs| / max(1, |lhs|)``."""
    return abs(lhs - rhs) / max(1.0, abs(lhs))


# ---------------------------------------------------------------------------
# Pythagorean identities
# ---------------------------------------------------------------------------


def pythagorean_smart(P, y, x, z):
    """Residuals of the two SMART identities.

    ``KL(q(x), r(z)) = KL(q(x), r(x)) + KL(x, z) - KL(Px, Pz)`` and
    ``KL(q(x), r(z)) = KL(q(Sz), r(z)) + KL(x, Sz)``.
    """
    qx, rz = kl_q_array(P, x), kl_r_array(P, y, z)
    lhs = dist.kl_vec(qx, rz)
    first = dist.kl_vec(qx, kl_r_array(P, y, x)) + dist.kl_vec(x, z) - dist.kl_vec(P @ x, P @ z)
    sz = smart_step(P, y, z)
    second = dist.kl_vec(kl_q_array(P, sz), rz) + dist.kl_vec(x, sz)
    return rel_residual(lhs, first), rel_residual(lhs, second)


def pythagorean_emml(P, y, x, z):
    """Residuals of ``KL(r(x), q(z)) = KL(r(z), q(z)) + KL(r(x), r(z))``
    and ``KL(r(x), q(z)) = KL(r(x), q(Mx)) + KL(Mx, z)``."""
    rx, qz = kl_r_array(P, y, x), kl_q_array(P, z)
    lhs = dist.kl_vec(rx, qz)
    rz = kl_r_array(P, y, z)
    first = dist.kl_vec(rz, qz) + dist.kl_vec(rx, rz)
    mx = emml_step(P, y, x)
    second = dist.kl_vec(rx, kl_q_array(P, mx)) + dist.kl_vec(mx, z)
    return rel_residual(lhs, first), rel_residual(lhs, second)


def pythagorean_euclid(A, b, x, z, r=None):
    """Residuals of the Euclidean identities.

    ``E(r, q(x)) = E(r(x), q(x)) + E(r, r(x))`` for ``r`` with row sums ``b``
    (default ``r = r(z)``), and
    ``E(r(x), q(z)) = E(r(x), q(Lx)) + sum_j c_j ((Lx)_j - z_j)**2``.
    """
    A = as_real_matrix(A)
    c = (A * A).sum(axis=0)
    rx, qx = euclid_r_array(A, b, x), euclid_q_array(A, x)
    r = euclid_r_array(A, b, z) if r is None else np.asarray(r, dtype=float)
    lhs1 = dist.sq_euclid(r, qx)
    first = dist.sq_euclid(rx, qx) + dist.sq_euclid(r, rx)
    lx = euclid_L_step(A, b, x)
    lhs2 = dist.sq_euclid(rx, euclid_q_array(A, z))
    second = dist.sq_euclid(rx, euclid_q_array(A, lx)) + dist.weighted_sq(lx, z, c)
    return rel_residual(lhs1, first), rel_residual(lhs2, second)


def r_array_distance_residual(A, b, x, z):
    """Residual of ``E(r(x), r(z)) = sum c_j (x_j - z_j)**2 - ||A(x - z)||^2 / J``."""
    A = as_real_matrix(A)
    c = (A * A).sum(axis=0)
    lhs = dist.sq_euclid(euclid_r_array(A, b, x), euclid_r_array(A, b, z))
    d = np.asarray(x, dtype=float) - np.asarray(z, dtype=float)
    return rel_residual(lhs, float(np.sum(c * d * d) - np.sum((A @ d) ** 2) / A.shape[1]))


def pythagorean_hellinger(P, y, x, z):
    """Residual of ``H(r(x), q(z)) = H(r(x), q(Tx)) + H(Tx, z)``."""
    rx = kl_r_array(P, y, x)
    tx = hellinger_T_step(P, y, x)
    lhs = dist.hellinger(rx, kl_q_array(P, z))
    return rel_residual(lhs, dist.hellinger(rx, kl_q_array(P, tx)) + dist.hellinger(tx, z))


def pythagorean_pearson(P, y, z, x):
    """Residuals of ``phi2(r(z), q(x)) = phi2(r(z), q(Rz)) + phi2(Rz, x)``
    and of ``phi2(Rz, x) = phi2(q(Rz), q(x))``. Needs positive ``P``."""
    rz = kl_r_array(P, y, z)
    rzz = pearson_R_step(P, y, z)
    lhs = dist.pearson(rz, kl_q_array(P, x))
    d = dist.pearson(rzz, x)
    return (
        rel_residual(lhs, dist.pearson(rz, kl_q_array(P, rzz)) + d),
        rel_residual(d, dist.pearson(kl_q_array(P, rzz), kl_q_array(P, x))),
    )


def mass_slack(family, y, x_next):
    """Slack of the mass law of one step's output.

    EMML ``-|sum(Mx) - sum(y)|``; SMART and Hellinger ``sum(y) - sum(out)``;
    Pearson ``sum(out) - sum(y)``.
    """
    total = float(np.sum(y))
    out = float(np.sum(x_next))
    if family == "emml":
        return -abs(out - total)
    if family in ("smart", "hellinger"):
        return total - out
    if family == "pearson":
        return out - total
    raise DomainError(f"no mass law for family {family!r}")


def contraction_slacks(P, x, z):
    """``KL(x,z) - KL(Px,Pz)``, ``H(x,z) - H(Px,Pz)``, ``phi2(x,z) - phi2(Px,Pz)``."""
    px, pz = P @ x, P @ z
    return (
        dist.kl_vec(x, z) - dist.kl_vec(px, pz),
        dist.hellinger(x, z) - dist.hellinger(px, pz),
        dist.pearson(x, z) - dist.pearson(px, pz),
    )


# ---------------------------------------------------------------------------
# monotonicity along traces
# ---------------------------------------------------------------------------


def first_monotonicity(family, trace, M=None, *, tol=MONO_TOL):
    """``f(x^k) - f(x^{k+1}) >= D(x^k, x^{k+1})`` for every recorded step.

    ``D`` is :func:`amprox.solvers.step_distance` of the family; the Euclid
    family needs the matrix ``M`` for its weights.
    """
    D = step_distance(family, M)
    xs, fs = trace.xs, trace.fs
    sl = [(fs[k] - fs[k + 1] - D(xs[k], xs[k + 1])) / (1.0 + abs(fs[k])) for k in range(len(xs) - 1)]
    return CheckReport.from_slacks(f"first_monotonicity[{family}]", sl, tol)


def _euclid_g(A, c, J):
    def g(x_prev, x):
        d = x_prev - x
        return J * float(np.sum(c * d * d)) - float(np.sum((A @ d) ** 2))

    return g


def second_monotonicity(family, x_hat, trace, M, data, *, tol=SECOND_MONO_TOL):
    """Decrease of the distance to a minimizer ``x_hat`` bounded by the objective excess.

    * smart: ``KL(x̂,x^k) - KL(x̂,x^{k+1}) >= f(x^{k+1}) - f(x̂)``
    * emml: ``KL(x̂,x^k) - KL(x̂,x^{k+1}) >= f(x^k) - f(x^{k+1})``
    * hellinger: ``KL(x̂,x^k) - KL(x̂,x^{k+1}) >= 2 (f(x^{k+1}) - f(x̂))``
    * euclid: ``g_k(x̂) - g_{k+1}(x̂) >= f(x^k) - f(x̂)`` with
      ``g_k(x) = J sum c_j (x^{k-1}_j - x_j)^2 - ||A(x^{k-1} - x)||^2``.
    """
    f = objective(family, M, data)
    xs, fs = trace.xs, trace.fs
    x_hat = np.asarray(x_hat, dtype=float)
    fh = f(x_hat)
    sl = []
    if family == "euclid":
        A = as_real_matrix(M)
        g = _euclid_g(A, (A * A).sum(axis=0), A.shape[1])
        for k in range(1, len(xs) - 1):
            sl.append((g(xs[k - 1], x_hat) - g(xs[k], x_hat) - (fs[k] - fh)) / (1.0 + abs(fs[k])))
    else:
        for k in range(len(xs) - 1):
            drop = dist.kl_vec(x_hat, xs[k]) - dist.kl_vec(x_hat, xs[k + 1])
            if family == "smart":
                rhs = fs[k + 1] - fh
            elif family == "emml":
                rhs = fs[k] - fs[k + 1]
            elif family == "hellinger":
                rhs = 2.0 * (fs[k + 1] - fh)
            else:
                raise DomainError(f"no second monotonicity property for {family!r}")
            sl.append((drop - rhs) / (1.0 + abs(fs[k])))
    return CheckReport.from_slacks(f"second_monotonicity[{family}]", sl, tol)


def at_induced_prox_check(spec, trace, x_hat, f, *, index="next", tol=SECOND_MONO_TOL, asserted=True):
    """Induced-proximal inequality for a PMA whose distance is ``d_phi``:

    ``KL(x̂, x^k) - KL(x̂, x^{k+1}) >= (f(x^j) - f(x̂)) / phi''(1)``

    with ``j = k + 1`` (``index="next"``, the form that holds for
    phi-divergence proximal methods) or ``j = k`` (``index="current"``).
    For the Hellinger kernel the factor is 2.
    """
    if index not in ("next", "current"):
        raise ValueError("index must be 'next' or 'current'")
    xs = trace.xs
    x_hat = np.asarray(x_hat, dtype=float)
    fh = f(x_hat)
    fs = [f(x) for x in xs]
    off = 1 if index == "next" else 0
    sl = [
        (dist.kl_vec(x_hat, xs[k]) - dist.kl_vec(x_hat, xs[k + 1]) - (fs[k + off] - fh) / spec.ddphi1)
        / (1.0 + abs(fs[k]))
        for k in range(len(xs) - 1)
    ]
    return CheckReport.from_slacks(f"at_induced_prox[{spec.name},{index}]", sl, tol, asserted=asserted)


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------


def _golden(fun, lo, hi, tol=1e-13, max_iter=300):
    """Golden-section minimization of a unimodal function on ``[lo, hi]``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    candidates = [(fun(x), x), (fun(lo), lo), (fun(hi), hi)]
    return min(candidates)[::-1]


def _solution_segment(P, y):
    """Nonnegative solutions of ``Px = y`` when they form a segment (nullity one).

    Returns ``(x_p, n, t_lo, t_hi)`` or ``None`` when the system has no
    nonnegative solution. Raises :class:`OracleUnavailable` for nullity > 1.
    """
    P = np.asarray(P, dtype=float)
    _, sv, vt = np.linalg.svd(P)
    rank = int(np.sum(sv > sv[0] * 1e-12))
    nullity = P.shape[1] - rank
    x_p = np.linalg.pinv(P) @ y
    if np.linalg.norm(P @ x_p - y) > 1e-9 * (1.0 + np.linalg.norm(y)):
        return None
    if nullity == 0:
        return (x_p, np.zeros_like(x_p), 0.0, 0.0) if (x_p >= -1e-12).all() else None
    if nullity > 1:
        raise OracleUnavailable(f"solution set has dimension {nullity}; grid oracle needs a segment")
    n = vt[-1]
    pos, neg = n > 1e-15, n < -1e-15
    t_lo = max((-x_p[pos] / n[pos]).max(initial=-np.inf), -np.inf)
    t_hi = min((-x_p[neg] / n[neg]).min(initial=np.inf), np.inf)
    if not (np.isfinite(t_lo) and np.isfinite(t_hi)) or t_lo > t_hi:
        return None
    return x_p, n, float(t_lo), float(t_hi)


def _run_to_limit(step, f, x0, max_iters=200_000, step_tol=1e-28):
    return run_af(step, f, x0, StoppingRule(max_iters=max_iters, f_tol=0.0, step_tol=step_tol))


def limit_characterization_smart(P, y, x0, trace=None, *, tol=LIMIT_TOL, grid=GRID_POINTS):
    """The SMART limit minimizes ``KL(x, x0)`` over nonnegative solutions of ``Px = y``.

    ``P`` must have unit column sums. The oracle is a ``grid``-point search
    over the solution segment with one golden-section refinement. When
    ``x0`` is constant the report also compares Shannon entropies. For an
    inconsistent system the check falls back to comparing ``KL(Px*, y)``
    with a bound-constrained numerical minimum.
    """
    P = np.asarray(P, dtype=float)
    y = np.asarray(y, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    f = objective("smart", P, y)
    if trace is None:
        trace = _run_to_limit(lambda z: smart_step(P, y, z), f, x0)
    x_star = trace.final
    seg = _solution_segment(P, y)
    if seg is None:
        res = minimize(f, x_star, method="L-BFGS-B", bounds=[(0, None)] * P.shape[1],
                       options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10_000})
        best = min(float(res.fun), f(x_star))
        return CheckReport.from_slacks("limit_smart[inconsistent]", [best - f(x_star)], tol,
                                       notes="no nonnegative solution; compared KL(Px,y) with L-BFGS-B minimum")
    x_p, n, t_lo, t_hi = seg
    kl0 = lambda t: dist.kl_vec(np.maximum(x_p + t * n, 0.0), x0)  # noqa: E731
    parts = []
    if t_hi == t_lo:
        best = kl0(t_lo)
        best_x = np.maximum(x_p + t_lo * n, 0.0)
    else:
        ts = np.linspace(t_lo, t_hi, grid)
        vals = np.array([kl0(t) for t in ts])
        i = int(np.argmin(vals))
        t_best, best = _golden(kl0, ts[max(i - 1, 0)], ts[min(i + 1, grid - 1)])
        best = min(best, float(vals[i]))
        best_x = np.maximum(x_p + t_best * n, 0.0)
    parts.append(CheckReport.from_slacks("kl_to_start_minimal", [best - dist.kl_vec(x_star, x0)], tol))
    parts.append(CheckReport.from_slacks("limit_matches_grid",
                                         [-float(np.max(np.abs(best_x - x_star)))], math.sqrt(tol)))
    if np.allclose(x0, x0[0]):
        parts.append(CheckReport.from_slacks(
            "max_entropy", [dist.shannon_entropy(x_star) - dist.shannon_entropy(best_x)], tol))
    return merge("limit_smart", parts, notes=f"segment t in [{t_lo:.6g}, {t_hi:.6g}], {grid} grid points")


def weighted_projection(A, b, x0):
    """Minimize ``sum c_j (x_j - x0_j)**2`` over least-squares solutions of ``Ax = b``."""
    A = as_real_matrix(A)
    c = (A * A).sum(axis=0)
    w = 1.0 / np.sqrt(c)
    x0 = np.asarray(x0, dtype=float)
    u = np.linalg.pinv(A * w[None, :]) @ (np.asarray(b, dtype=float) - A @ x0)
    return x0 + w * u


def limit_characterization_euclid(A, b, x0, trace=None, *, tol=SECOND_MONO_TOL):
    """The L-iteration limit is the ``c``-weighted projection of ``x0`` onto the minimizers."""
    A = as_real_matrix(A)
    b = np.asarray(b, dtype=float)
    if trace is None:
        trace = _run_to_limit(lambda z: euclid_L_step(A, b, z), objective("euclid", A, b), x0)
    x_hat = weighted_projection(A, b, x0)
    return CheckReport.from_slacks("limit_euclid", [-float(np.max(np.abs(trace.final - x_hat)))], tol,
                                   notes=f"{trace.iterations} iterations ({trace.status})")


# ---------------------------------------------------------------------------
# probes of open questions (never asserted)
# ---------------------------------------------------------------------------


def hrr_probe(P, y, pairs):
    """Residual ``H(r(z), q(x)) - H(r(x), q(x)) - H(r(z), r(x))`` on sample pairs.

    Reported separately for the given ``(x, z)`` pairs and for ``x = Tz``.
    """
    def resid(x, z):
        rx, rz, qx = kl_r_array(P, y, x), kl_r_array(P, y, z), kl_q_array(P, x)
        return dist.hellinger(rz, qx) - dist.hellinger(rx, qx) - dist.hellinger(rz, rx)

    free = [resid(x, z) for x, z in pairs]
    at_t = [resid(hellinger_T_step(P, y, z), z) for _, z in pairs]
    parts = [
        CheckReport.from_slacks("hrr[random]", free, math.inf, asserted=False,
                                notes=f"max|res|={max(map(abs, free), default=0):.3e}"),
        CheckReport.from_slacks("hrr[x=Tz]", at_t, math.inf, asserted=False,
                                notes=f"max|res|={max(map(abs, at_t), default=0):.3e}"),
    ]
    r = merge("hrr_probe", parts, notes="conjecture probe; residuals are descriptive")
    return CheckReport(r.name, r.samples, r.worst_slack, r.mean_slack, r.tolerance, r.passed, False, r.notes, r.parts)


def summa2_probe(family, P, y, trace, samples, *, tol=SECOND_MONO_TOL):
    """SUMMA2 candidate ``h_k(x) = g(x | x^{k-1}) - f(x)`` for the Hellinger or Pearson iteration."""
    mm = mm_instance(family, P, y)
    xk = trace.x

    def h(k, x):
        return mm.g(x, xk(k - 1)) - mm.f(x)

    return check_summa2(h, mm.f, trace, samples, iterations=range(1, trace.iterations),
                        tol=tol, asserted=False, name=f"summa2_probe[{family}]")


def emml_start_dependence_probe(P, y, starts, *, max_iters=20_000):
    """Run EMML to convergence from each start and report how far apart the limits land.

    The reported value is minus the largest coordinate gap between any limit
    and the first one, so 0 means every start reached the same point.
    """
    P = np.asarray(P, dtype=float)
    y = np.asarray(y, dtype=float)
    f = objective("emml", P, y)
    limits = [_run_to_limit(lambda z: emml_step(P, y, z), f, np.asarray(s, dtype=float), max_iters).final
              for s in starts]
    spread = [-float(np.max(np.abs(x - limits[0]))) for x in limits[1:]]
    fs = [f(x) for x in limits]
    return CheckReport.from_slacks("emml_start_dependence", spread, math.inf, asserted=False,
                                   notes=f"{len(limits)} starts; objective range {max(fs) - min(fs):.3e}")


def euclid_summa2_check(A, b, trace, samples, *, tol=SECOND_MONO_TOL):
    """Euclidean SUMMA2-type inequality read as

    ``h_k(x) - h_{k+1}(x) >= f(x^k) - f(x) + J sum c_j ((Lx)_j - x_j)^2``

    with ``h_k(x) = J sum_j c_j ((Lx)_j - x^k_j)^2``.
    """
    A = as_real_matrix(A)
    b = np.asarray(b, dtype=float)
    c = (A * A).sum(axis=0)
    J = A.shape[1]
    f = objective("euclid", A, b)
    sl = []
    for k in range(trace.iterations):
        xk, xk1, fk = trace.x(k), trace.x(k + 1), trace.fs[k]
        pts = samples(k) if callable(samples) else samples
        for x in pts:
            lx = euclid_L_step(A, b, x)
            h = J * float(np.sum(c * (lx - xk) ** 2)) - J * float(np.sum(c * (lx - xk1) ** 2))
            sl.append((h - (fk - f(x) + J * float(np.sum(c * (lx - x) ** 2)))) / (1.0 + abs(fk)))
    return CheckReport.from_slacks("euclid_summa2", sl, tol)


def coincidence_probe(P, y, x_hat, trace):
    """Side-by-side slacks of the two KL inequalities on a Hellinger T-sequence.

    ``klh``: ``KL(x̂,x^k) - KL(x̂,x^{k+1}) - 2(f(x^{k+1}) - f(x̂))``;
    ``hell``: the same with ``f(x^k)`` in place of ``f(x^{k+1})``.
    Returns ``(klh, hell, report)``.
    """
    f = objective("hellinger", P, y)
    x_hat = np.asarray(x_hat, dtype=float)
    xs = trace.xs
    fh = f(x_hat)
    drops = np.array([dist.kl_vec(x_hat, xs[k]) - dist.kl_vec(x_hat, xs[k + 1]) for k in range(len(xs) - 1)])
    fs = np.array([f(x) for x in xs])
    klh = drops - 2.0 * (fs[1:] - fh)
    hell = drops - 2.0 * (fs[:-1] - fh)
    parts = [
        CheckReport.from_slacks("coincidence[klh]", klh, SECOND_MONO_TOL, asserted=False),
        CheckReport.from_slacks("coincidence[hell]", hell, SECOND_MONO_TOL, asserted=False),
    ]
    r = merge("coincidence_probe", parts, notes="probe; hell column uses f(x^k)")
    return klh, hell, CheckReport(r.name, r.samples, r.worst_slack, r.mean_slack, r.tolerance,
                                  r.passed, False, r.notes, r.parts)


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleSolution:
    minimizer: np.ndarray
    optimum: float
    method: str


def _bisect_increasing(fp, lo=1.0, hi=1.0, iters=400):
    while fp(lo) > 0:
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    while fp(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise OracleUnavailable("no sign change of the derivative")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if fp(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _one_column_derivative(family, p, y):
    s = p.sum()
    if family == "smart":
        m = p > 0
        return lambda x: float(np.sum(p[m] * np.log(p[m] * x / y[m])))
    if (p <= 0).any():
        raise OracleUnavailable(f"{family} oracle needs a strictly positive column")
    if family == "emml":
        return lambda x: s - y.sum() / x
    if family == "hellinger":
        return lambda x: s - np.sum(np.sqrt(p * y)) / math.sqrt(x)
    if family == "pearson":
        return lambda x: s - np.sum(y * y / p) / (x * x)
    raise OracleUnavailable(f"no one-column oracle for {family!r}")


def oracle_minimize(family, M, data):
    """Minimizer of the family's objective found without the iteration.

    * euclid/landweber: minimum-norm least squares via the pseudo-inverse;
    * KL families with one column: bisection on the closed-form derivative;
    * KL families with two columns: nested golden-section search.
    """
    M = np.asarray(M, dtype=float)
    data = np.asarray(data, dtype=float)
    f = objective(family, M, data)
    if family in ("euclid", "landweber"):
        x = np.linalg.pinv(M) @ data
        return OracleSolution(x, f(x), "normal equations")
    if family not in KL_FAMILIES:
        raise OracleUnavailable(f"unknown family {family!r}")
    J = M.shape[1]
    if J == 1:
        x = np.array([_bisect_increasing(_one_column_derivative(family, M[:, 0], data))])
        return OracleSolution(x, f(x), "1-D calculus root")
    if J == 2:
        def safe(x):
            try:
                return f(x)
            except DomainError:
                return math.inf

        upper = 10.0 * data.sum() / M.sum(axis=0).min() + 10.0
        for _ in range(8):
            def inner(x1):
                return _golden(lambda x2: safe(np.array([x1, x2])), 0.0, upper)[1]

            x1, _ = _golden(inner, 0.0, upper)
            x2, val = _golden(lambda t: safe(np.array([x1, t])), 0.0, upper)
            if max(x1, x2) < 0.9 * upper:
                x = np.array([x1, x2])
                return OracleSolution(x, f(x), "golden-section grid")
            upper *= 4.0
        raise OracleUnavailable("golden-section search did not find an interior minimizer")
    raise OracleUnavailable(f"oracle unavailable for J={J} in family {family!r}")


def nonneg_consistent(P, y, tol=1e-10):
    """Whether ``Px = y`` has a nonnegative solution (via NNLS)."""
    _, res = nnls(np.asarray(P, dtype=float), np.asarray(y, dtype=float))
    return res <= tol * (1.0 + np.linalg.norm(y))
