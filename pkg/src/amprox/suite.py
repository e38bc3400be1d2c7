"""Named property checks over one problem, as run by ``amprox check``."""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from . import diagnostics as diag
from . import distances as dist
from . import framework as fw
from . import solvers
from .errors import ConfigError, OracleUnavailable
from .model import KL_FAMILIES, normalize_columns
from .report import CheckReport, merge

MONITOR_ITERS = 50
DEFAULT_SAMPLES = 200

# name -> families it applies to; probes never affect the exit code
PROPERTIES = {
    "pythagorean": ("smart", "emml", "euclid", "hellinger", "pearson"),
    "first_monotonicity": ("smart", "emml", "euclid", "hellinger", "pearson"),
    "second_monotonicity": ("smart", "emml", "euclid", "hellinger"),
    "summa": ("smart", "euclid"),
    "summa2": ("emml", "euclid"),
    "3pp": ("smart", "emml", "euclid", "hellinger"),
    "w3pp": ("smart", "emml", "euclid", "hellinger"),
    "mass": ("smart", "emml", "hellinger", "pearson"),
    "contraction": KL_FAMILIES,
    "limit": ("smart", "euclid"),
    "hrr_probe": KL_FAMILIES,
    "summa2_probe": ("hellinger", "pearson"),
    "coincidence_probe": ("hellinger",),
    "emml_start_probe": ("emml",),
}
PROBES = frozenset({"hrr_probe", "summa2_probe", "coincidence_probe", "emml_start_probe"})


class Context:
    """Shared, lazily computed state for the checks on one problem."""

    def __init__(self, family, matrix, data, start, *, seed=0, samples=DEFAULT_SAMPLES, iters=MONITOR_ITERS):
        self.family = family
        self.seed = seed
        self.n_samples = samples
        self.iters = iters
        self.data = np.asarray(data, dtype=float)
        if family in KL_FAMILIES:
            self.M, self.x0 = normalize_columns(matrix, start)
        else:
            self.M, self.x0 = np.asarray(matrix, dtype=float), np.asarray(start, dtype=float)
        self.f = solvers.objective(family, self.M, self.data)

    @property
    def positive(self):
        return self.family in KL_FAMILIES

    def step(self, z):
        if self.family == "euclid":
            return solvers.euclid_L_step(self.M, self.data, z)
        return solvers.STEPS[self.family](self.M, self.data, z)

    @cached_property
    def trace(self):
        return fw.run_af(self.step, self.f, self.x0, fw.StoppingRule(self.iters, 0.0, 0.0))

    @cached_property
    def limit_trace(self):
        return fw.run_af(self.step, self.f, self.x0, fw.StoppingRule(50_000, 0.0, 1e-28))

    @cached_property
    def samples(self):
        extra = [self.x_hat] if self.x_hat is not None else []
        return fw.sample_points(self.trace, self.n_samples, seed=self.seed, positive=self.positive, extra=extra)

    @cached_property
    def x_hat(self):
        """A minimizer: oracle when available, exact nonnegative solution, else a converged run."""
        try:
            if self.family == "euclid" or self.M.shape[1] <= 2:
                return diag.oracle_minimize(self.family, self.M, self.data).minimizer
        except OracleUnavailable:
            pass
        if self.positive and diag.nonneg_consistent(self.M, self.data):
            from scipy.optimize import nnls

            return nnls(self.M, self.data)[0]
        return self.limit_trace.final

    def pairs(self, n):
        rng = np.random.default_rng(self.seed + 1)
        J = self.M.shape[1]
        if self.positive:
            return [(rng.uniform(0.1, 3.0, J), rng.uniform(0.1, 3.0, J)) for _ in range(n)]
        return [(rng.normal(size=J), rng.normal(size=J)) for _ in range(n)]


def _pythagorean(ctx):
    M, y, fam = ctx.M, ctx.data, ctx.family
    fn = {
        "smart": diag.pythagorean_smart,
        "emml": diag.pythagorean_emml,
        "euclid": diag.pythagorean_euclid,
        "hellinger": lambda *a: (diag.pythagorean_hellinger(*a),),
        "pearson": diag.pythagorean_pearson,
    }[fam]
    res = [r for x, z in ctx.pairs(ctx.n_samples) for r in fn(M, y, x, z)]
    return CheckReport.from_slacks(f"pythagorean[{fam}]", -np.asarray(res), diag.IDENTITY_TOL)


def _summa(ctx):
    tr, M, y = ctx.trace, ctx.M, ctx.data
    if ctx.family == "smart":
        def gk(k, x):
            return dist.kl_vec(x, tr.x(k - 1)) - dist.kl_vec(M @ x, M @ tr.x(k - 1))
    else:
        c = (M * M).sum(axis=0)
        J = M.shape[1]

        def gk(k, x):
            d = tr.x(k - 1) - x
            return J * float(np.sum(c * d * d)) - float(np.sum((M @ d) ** 2))

    def gap(k, x):
        return ctx.f(x) + gk(k, x) - ctx.f(tr.x(k)) - gk(k, tr.x(k))

    return fw.check_summa(gap, lambda k, x: gk(k + 1, x), ctx.samples, range(1, tr.iterations),
                          scale=lambda k: 1.0 + abs(tr.fs[k]), name=f"summa[{ctx.family}]")


def _summa2(ctx):
    if ctx.family == "euclid":
        return diag.euclid_summa2_check(ctx.M, ctx.data, ctx.trace, ctx.samples)
    tr, M, y = ctx.trace, ctx.M, ctx.data
    return fw.check_summa2(lambda k, x: dist.kl_vec(solvers.emml_step(M, y, x), tr.x(k)), ctx.f, tr,
                           ctx.samples, iterations=range(0, tr.iterations), name="summa2[emml]")


def _am_check(checker):
    def run(ctx):
        am = solvers.am_instance(ctx.family, ctx.M, ctx.data)
        # the AM monitors are costlier per sample; use a quarter of the sample budget
        smp = ctx.samples[: max(ctx.n_samples // 4, 10)]
        return checker(am, ctx.trace, smp, name=f"{checker.__name__[6:]}[{ctx.family}]")

    return run


def _mass(ctx):
    rng = np.random.default_rng(ctx.seed + 2)
    J = ctx.M.shape[1]
    xs = [rng.uniform(0.1, 3.0, J) for _ in range(ctx.n_samples)] + list(ctx.trace.xs)
    op = solvers.STEPS[ctx.family]
    sl = [diag.mass_slack(ctx.family, ctx.data, op(ctx.M, ctx.data, x)) / (1.0 + ctx.data.sum()) for x in xs]
    return CheckReport.from_slacks(f"mass[{ctx.family}]", sl, 1e-12)


def _contraction(ctx):
    sl = [s for x, z in ctx.pairs(ctx.n_samples) for s in diag.contraction_slacks(ctx.M, x, z)]
    return CheckReport.from_slacks("contraction", sl, 1e-12)


def _limit(ctx):
    if ctx.family == "euclid":
        return diag.limit_characterization_euclid(ctx.M, ctx.data, ctx.x0, ctx.limit_trace)
    try:
        return diag.limit_characterization_smart(ctx.M, ctx.data, ctx.x0, ctx.limit_trace)
    except OracleUnavailable as exc:
        return CheckReport("limit_smart", 0, math.nan, math.nan, diag.LIMIT_TOL, True, False, str(exc))


def _second(ctx):
    return diag.second_monotonicity(ctx.family, ctx.x_hat, ctx.trace, ctx.M, ctx.data)


def _hrr(ctx):
    return diag.hrr_probe(ctx.M, ctx.data, ctx.pairs(ctx.n_samples))


def _summa2_probe(ctx):
    return diag.summa2_probe(ctx.family, ctx.M, ctx.data, ctx.trace, ctx.samples[: max(ctx.n_samples // 4, 10)])


def _coincidence(ctx):
    return diag.coincidence_probe(ctx.M, ctx.data, ctx.x_hat, ctx.trace)[2]


def _emml_start(ctx):
    rng = np.random.default_rng(ctx.seed + 3)
    J = ctx.M.shape[1]
    starts = [ctx.x0] + [rng.uniform(0.1, 3.0, J) for _ in range(4)]
    return diag.emml_start_dependence_probe(ctx.M, ctx.data, starts)


RUNNERS = {
    "pythagorean": _pythagorean,
    "first_monotonicity": lambda ctx: diag.first_monotonicity(ctx.family, ctx.trace, ctx.M),
    "second_monotonicity": _second,
    "summa": _summa,
    "summa2": _summa2,
    "3pp": _am_check(fw.check_3pp),
    "w3pp": _am_check(fw.check_w3pp),
    "mass": _mass,
    "contraction": _contraction,
    "limit": _limit,
    "hrr_probe": _hrr,
    "summa2_probe": _summa2_probe,
    "coincidence_probe": _coincidence,
    "emml_start_probe": _emml_start,
}


def applicable(family):
    return [name for name, fams in PROPERTIES.items() if family in fams]


def run_checks(family, matrix, data, start, props=None, *, seed=0, samples=DEFAULT_SAMPLES, iters=MONITOR_ITERS):
    """Run the named properties (default: all applicable) and return their reports."""
    if family == "landweber":
        family = "euclid"
    names = applicable(family) if props is None else list(props)
    for name in names:
        if name not in PROPERTIES:
            raise ConfigError(f"unknown property {name!r}; known: {', '.join(PROPERTIES)}")
        if family not in PROPERTIES[name]:
            raise ConfigError(f"property {name!r} does not apply to family {family!r}")
    ctx = Context(family, matrix, data, start, seed=seed, samples=samples, iters=iters)
    reports = []
    for name in names:
        r = RUNNERS[name](ctx)
        if name in PROBES and r.asserted:
            r = CheckReport(r.name, r.samples, r.worst_slack, r.mean_slack, r.tolerance, r.passed, False,
                            r.notes, r.parts)
        reports.append(r)
    return reports


__all__ = ["PROPERTIES", "PROBES", "Context", "applicable", "run_checks", "merge"]
