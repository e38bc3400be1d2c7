"""Auxiliary-function iteration driver, AM runner, and the PMA/MM/AM adapters.

The three formulations are interchangeable:

* AM  -- alternately minimize ``Phi(x, y)`` over ``x`` and over ``y``;
* PMA -- minimize ``f(x) + d(x, x_prev)``;
* MM  -- minimize a majorizer ``g(x | x_prev)`` of ``f``.

Given an AM coupling with best response ``y(x)``, ``f(x) = Phi(x, y(x))``,
``d(x, z) = Phi(x, y(z)) - f(x)`` and ``g(x | z) = Phi(x, y(z))``. The
adapters below build one from the other so tests can confirm that all
three produce the same iterates.

The ``check_*`` monitors evaluate the SUMMA, SUMMA2, three-point and weak
three-point inequalities on sampled points. They never raise on a
violation; they return a :class:`~amprox.report.CheckReport`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DescentError, IterationError
from .report import CheckReport, merge

__all__ = [
    "StoppingRule",
    "Record",
    "IterationTrace",
    "AMInstance",
    "PMAInstance",
    "MMInstance",
    "run_af",
    "run_am",
    "run_pma",
    "run_mm",
    "am_to_pma",
    "am_to_mm",
    "mm_to_pma",
    "mm_to_am",
    "pma_to_mm",
    "sample_points",
    "check_summa",
    "check_summa_pma",
    "check_summa2",
    "check_3pp",
    "check_w3pp",
    "SLACK_TOL",
]

SLACK_TOL = 1e-10


@dataclass(frozen=True)
class StoppingRule:
    """Stop at ``max_iters``, or when the decrease of f drops below ``f_tol``,
    or when the step distance drops below ``step_tol``."""

    max_iters: int = 1000
    f_tol: float = 0.0
    step_tol: float = 1e-12

    def __post_init__(self):
        if not isinstance(self.max_iters, (int, np.integer)) or self.max_iters < 1:
            raise ConfigError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        for name in ("f_tol", "step_tol"):
            v = getattr(self, name)
            if not v >= 0:
                raise ConfigError(f"{name} must be nonnegative, got {v!r}")


@dataclass(frozen=True)
class Record:
    k: int
    x: np.ndarray
    f: float
    step_distance: float
    slacks: dict = field(default_factory=dict)


@dataclass
class IterationTrace:
    """Initial point plus one append-only record per iteration (k = 1, 2, ...).

    ``status`` is ``"converged"`` when a tolerance fired and ``"max_iters"``
    when the iteration cap was reached.
    """

    x0: np.ndarray
    f0: float
    records: list = field(default_factory=list)
    status: str = "running"

    def append(self, record):
        expected = len(self.records) + 1
        if record.k != expected:
            raise ValueError(f"record k={record.k} out of order; expected {expected}")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    @property
    def iterations(self):
        return len(self.records)

    @property
    def xs(self):
        """All iterates including ``x0``, shape ``(K + 1, J)``."""
        return np.vstack([self.x0] + [r.x for r in self.records])

    @property
    def fs(self):
        return np.array([self.f0] + [r.f for r in self.records])

    def x(self, k):
        return self.x0 if k == 0 else self.records[k - 1].x

    @property
    def final(self):
        return self.records[-1].x if self.records else self.x0

    @property
    def final_f(self):
        return self.records[-1].f if self.records else self.f0

    def slack_names(self):
        names = set()
        for r in self.records:
            names.update(r.slacks)
        return sorted(names)

    def to_csv(self):
        """Comma-delimited text: ``k, f, step_distance`` then slacks alphabetically."""
        names = self.slack_names()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "f", "step_distance", *names])
        for r in self.records:
            w.writerow([r.k, _fmt(r.f), _fmt(r.step_distance),
                        *(_fmt(r.slacks.get(n, math.nan)) for n in names)])
        return buf.getvalue()


def _fmt(v):
    return format(float(v), ".17g")


def _sq_step(x_prev, x):
    d = np.asarray(x, dtype=float) - np.asarray(x_prev, dtype=float)
    return float(np.dot(d.ravel(), d.ravel()))


def run_af(step, f, x0, stop=None, *, distance=None, slacks=None, descent_tol=1e-12):
    """Iterate ``x_k = step(x_{k-1})`` and record the descent of ``f``.

    ``distance(x_prev, x)`` gives the recorded step distance (squared
    Euclidean by default). ``slacks`` maps a name to ``fn(k, x_prev, x)``,
    evaluated every iteration. Any exception from ``step`` or ``f`` is
    re-raised as :class:`IterationError` carrying the iteration index; an
    increase of ``f`` beyond ``descent_tol * (1 + |f|)`` raises
    :class:`DescentError`.
    """
    stop = stop or StoppingRule()
    distance = distance or _sq_step
    slacks = slacks or {}
    x_prev = np.array(x0, dtype=float)
    f_prev = float(f(x_prev))
    if not math.isfinite(f_prev):
        raise IterationError(0, f"f(x0) = {f_prev} is not finite")
    trace = IterationTrace(x0=x_prev.copy(), f0=f_prev)
    for k in range(1, stop.max_iters + 1):
        try:
            x = np.asarray(step(x_prev), dtype=float)
            fk = float(f(x))
        except Exception as exc:  # noqa: BLE001 - re-raised with the index
            raise IterationError(k, f"{type(exc).__name__}: {exc}") from exc
        if not math.isfinite(fk) or not np.all(np.isfinite(x)):
            raise IterationError(k, "iterate or objective is not finite")
        if fk > f_prev + descent_tol * (1.0 + abs(f_prev)):
            raise DescentError(k, f"objective increased from {f_prev!r} to {fk!r}")
        d = float(distance(x_prev, x))
        sl = {name: float(fn(k, x_prev, x)) for name, fn in slacks.items()}
        trace.append(Record(k, x, fk, d, sl))
        if d < stop.step_tol or (f_prev - fk) < stop.f_tol:
            trace.status = "converged"
            return trace
        x_prev, f_prev = x, fk
    trace.status = "max_iters"
    return trace


@dataclass(frozen=True)
class AMInstance:
    """Coupling ``phi(x, y) >= 0`` with exact partial minimizers.

    ``argmin_y(x)`` is the best response ``y(x)``.
    """

    phi: Callable
    argmin_x: Callable
    argmin_y: Callable

    def f(self, x):
        return self.phi(x, self.argmin_y(x))


@dataclass(frozen=True)
class PMAInstance:
    """Objective ``f``, distance ``d`` with ``d(x, x) = 0``, and the proximal step."""

    f: Callable
    d: Callable
    prox_step: Callable


@dataclass(frozen=True)
class MMInstance:
    """Objective ``f``, majorizer ``g(x, z) >= f(x)`` with ``g(x, x) = f(x)``,
    and ``step(z) = argmin_x g(x, z)``."""

    f: Callable
    g: Callable
    step: Callable


def am_to_pma(am):
    """PMA form of an AM coupling: ``d(x, z) = Phi(x, y(z)) - Phi(x, y(x))``."""

    def d(x, z):
        return am.phi(x, am.argmin_y(z)) - am.phi(x, am.argmin_y(x))

    return PMAInstance(f=am.f, d=d, prox_step=lambda z: am.argmin_x(am.argmin_y(z)))


def am_to_mm(am):
    return MMInstance(
        f=am.f,
        g=lambda x, z: am.phi(x, am.argmin_y(z)),
        step=lambda z: am.argmin_x(am.argmin_y(z)),
    )


def mm_to_pma(mm):
    return PMAInstance(f=mm.f, d=lambda x, z: mm.g(x, z) - mm.f(x), prox_step=mm.step)


def pma_to_mm(pma):
    return MMInstance(f=pma.f, g=lambda x, z: pma.f(x) + pma.d(x, z), step=pma.prox_step)


def mm_to_am(mm):
    """AM form of an MM method: ``Phi(x, z) = g(x | z)``, best response ``y(x) = x``."""
    return AMInstance(phi=mm.g, argmin_x=mm.step, argmin_y=lambda x: np.array(x, dtype=float))


def run_am(am, y0, stop=None, **kwargs):
    """Alternating minimization started from ``y0``.

    The trace's initial point is ``argmin_x Phi(x, y0)``; iterate ``k``
    is ``argmin_x Phi(x, y(x_{k-1}))`` and its recorded value is
    ``f(x_k) = Phi(x_k, y(x_k))``, which is also ``Phi(x_k, y_{k+1})``.
    """
    x_init = am.argmin_x(y0)
    return run_af(lambda z: am.argmin_x(am.argmin_y(z)), am.f, x_init, stop, **kwargs)


def run_pma(pma, x0, stop=None, **kwargs):
    return run_af(pma.prox_step, pma.f, x0, stop, **kwargs)


def run_mm(mm, x0, stop=None, **kwargs):
    return run_af(mm.step, mm.f, x0, stop, **kwargs)


# ---------------------------------------------------------------------------
# inequality monitors
# ---------------------------------------------------------------------------


def sample_points(trace, n=200, *, seed=0, positive=True, extra=()):
    """Sample points for the universally quantified inequalities.

    Draws from the iterates themselves, any ``extra`` points (e.g. an
    oracle minimizer), and uniform random perturbations of iterates until
    ``n`` points are collected.
    """
    rng = np.random.default_rng(seed)
    xs = trace.xs
    pts = [np.array(p, dtype=float) for p in extra]
    picks = rng.choice(len(xs), size=min(len(xs), max(n // 4, 1)), replace=False)
    pts.extend(xs[i].copy() for i in sorted(picks))
    while len(pts) < n:
        base = xs[rng.integers(len(xs))]
        if positive:
            pts.append(base * rng.uniform(0.05, 3.0, size=base.shape) + rng.uniform(0, 1e-3, size=base.shape))
        else:
            pts.append(base + rng.uniform(-1.0, 1.0, size=base.shape) * (1.0 + np.abs(base)))
    return pts[:n]


def _scale(trace, k):
    return 1.0 + abs(trace.fs[k])


def check_summa(Gk_gap, g_next, samples, iterations, *, scale=None, tol=SLACK_TOL, name="summa"):
    """SUMMA inequality ``G_k(x) - G_k(x^k) >= g_{k+1}(x)``.

    ``Gk_gap(k, x)`` returns ``G_k(x) - G_k(x^k)``; ``g_next(k, x)`` returns
    ``g_{k+1}(x)``. Slacks are divided by ``scale(k)`` when given.
    """
    out = []
    for k in iterations:
        s = scale(k) if scale else 1.0
        pts = samples(k) if callable(samples) else samples
        out.extend((Gk_gap(k, x) - g_next(k, x)) / s for x in pts)
    return CheckReport.from_slacks(name, out, tol)


def check_summa_pma(pma, trace, samples, *, tol=SLACK_TOL, name="summa"):
    """SUMMA inequality for a PMA, with ``g_k(x) = d(x, x^{k-1})``."""
    f, d, xk = pma.f, pma.d, trace.x

    def gap(k, x):
        return f(x) + d(x, xk(k - 1)) - (f(xk(k)) + d(xk(k), xk(k - 1)))

    return check_summa(gap, lambda k, x: d(x, xk(k)), samples, range(1, trace.iterations + 1),
                       scale=lambda k: _scale(trace, k), tol=tol, name=name)


def check_summa2(h, f, trace, samples, *, iterations=None, tol=SLACK_TOL, asserted=True, name="summa2"):
    """SUMMA2 inequality ``h(k, x) + f(x) >= h(k + 1, x) + f(x^k)``.

    ``h`` must be nonnegative; negative values are reported in the notes.
    """
    if iterations is None:
        iterations = range(1, trace.iterations)
    out = []
    negative_h = 0
    for k in iterations:
        fk = trace.fs[k]
        s = _scale(trace, k)
        pts = samples(k) if callable(samples) else samples
        for x in pts:
            hk, hk1 = h(k, x), h(k + 1, x)
            negative_h += (hk < -tol) + (hk1 < -tol)
            out.append((hk + f(x) - hk1 - fk) / s)
    notes = f"{negative_h} negative h values" if negative_h else ""
    return CheckReport.from_slacks(name, out, tol, asserted=asserted, notes=notes)


def check_3pp(am, trace, samples, *, tol=SLACK_TOL, asserted=True, name="3pp"):
    """Three-point property ``Phi(x, y^k) - Phi(x^k, y^k) >= d(x, x^k)``, ``y^k = y(x^{k-1})``."""
    d = am_to_pma(am).d
    out = []
    for k in range(1, trace.iterations + 1):
        xk, yk = trace.x(k), am.argmin_y(trace.x(k - 1))
        base = am.phi(xk, yk)
        s = _scale(trace, k)
        pts = samples(k) if callable(samples) else samples
        out.extend((am.phi(x, yk) - base - d(x, xk)) / s for x in pts)
    return CheckReport.from_slacks(name, out, tol, asserted=asserted)


def check_w3pp(am, trace, samples, *, tol=SLACK_TOL, asserted=True, name="w3pp"):
    """Weak three-point property and the SUMMA2 inequality it implies.

    Part ``w3pp``: ``Phi(x, y^k) - Phi(x^k, y^{k+1}) >= d(x, x^k)``.
    Part ``summa2_am``: ``d(x, x^{k-1}) + f(x) >= d(x, x^k) + f(x^k)``.
    """
    d = am_to_pma(am).d
    weak, summa2 = [], []
    for k in range(1, trace.iterations + 1):
        xk, xprev = trace.x(k), trace.x(k - 1)
        yk = am.argmin_y(xprev)
        fk = am.phi(xk, am.argmin_y(xk))
        s = _scale(trace, k)
        pts = samples(k) if callable(samples) else samples
        for x in pts:
            dxk = d(x, xk)
            weak.append((am.phi(x, yk) - fk - dxk) / s)
            summa2.append((d(x, xprev) + am.f(x) - dxk - fk) / s)
    parts = [
        CheckReport.from_slacks(f"{name}", weak, tol, asserted=asserted),
        CheckReport.from_slacks(f"{name}_summa2", summa2, tol, asserted=asserted),
    ]
    return merge(name, parts)
