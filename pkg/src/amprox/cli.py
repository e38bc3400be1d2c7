"""Command-line front end: ``amprox {solve,check,compare,gen}``.

Exit codes: 0 ok, 1 error, 2 iteration cap reached (``solve`` only).

Trace CSV columns are ``k, f, step_distance`` followed by the named slacks
in alphabetical order. Report CSV columns follow
:func:`amprox.report.reports_to_csv`.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import diagnostics as diag
from . import solvers, suite
from .errors import ConfigError, DomainError, IterationError
from .framework import StoppingRule, run_af
from .model import FAMILIES, KL_FAMILIES, normalize_columns
from .problem_io import ProblemFile, ProblemFileError, format_problem, load_problem
from .report import reports_to_csv

EXIT_OK, EXIT_ERROR, EXIT_CAP = 0, 1, 2
COMPARE_ITERS = 50


def _fmt(v):
    return format(float(v), ".17g")


def _emit(text, out, default_stream):
    if out in (None, "-"):
        default_stream.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load(args):
    pf = load_problem(args.file)
    if getattr(args, "family", None):
        pf = ProblemFile(args.family, pf.matrix, pf.data, pf.start, pf.options)
        pf.instance()
    return pf


def cmd_solve(args, stdout, stderr):
    pf = _load(args)
    rule = pf.rule(max_iters=args.max_iters, f_tol=args.f_tol, step_tol=args.step_tol)
    gamma = args.gamma if args.gamma is not None else pf.options.get("gamma")
    sol = solvers.solve(pf.instance(), solvers.SolverConfig(gamma=gamma, rule=rule))
    tr = sol.trace
    out = args.out
    if out is None:
        out = f"{args.file}.trace.csv"
    _emit(tr.to_csv(), out, stdout)
    info = stderr if out == "-" else stdout
    print(f"family: {sol.family}", file=info)
    if sol.gamma is not None:
        print(f"gamma: {_fmt(sol.gamma)}", file=info)
    print(f"status: {tr.status}", file=info)
    print(f"iterations: {tr.iterations}", file=info)
    print(f"final_f: {_fmt(tr.final_f)}", file=info)
    print("limit: " + " ".join(_fmt(v) for v in sol.limit), file=info)
    return EXIT_OK if sol.converged else EXIT_CAP


def cmd_check(args, stdout, stderr):
    pf = _load(args)
    if args.all or not args.props:
        props = None
    else:
        props = [p.strip() for p in args.props.split(",") if p.strip()]
    seed = args.seed if args.seed is not None else pf.options.get("seed", 0)
    reports = suite.run_checks(pf.family, pf.matrix, pf.data, pf.start, props,
                               seed=seed, samples=args.samples, iters=args.max_iters or suite.MONITOR_ITERS)
    _emit(reports_to_csv(reports), args.out or f"{args.file}.report.csv", stdout)
    info = stderr if args.out == "-" else stdout
    print(f"seed: {seed}", file=info)
    for r in reports:
        print(r.summary(), file=info)
    return EXIT_OK if all(r.passed for r in reports if r.asserted) else EXIT_ERROR


def equivalence_deviation(A, b, x0, iters=COMPARE_ITERS):
    """Per-iteration max coordinate gap between the L iteration and rescaled Landweber (gamma=1)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    tf = solvers.landweber_equiv_transform(A, b)
    x = np.asarray(x0, dtype=float).copy()
    z = tf.forward(x)
    devs = []
    for _ in range(iters):
        x = solvers.euclid_L_step(A, b, x)
        z = z - tf.B.T @ (tf.B @ z - b)
        devs.append(float(np.max(np.abs(tf.back(z) - x))))
    return devs, float(np.trace(tf.B.T @ tf.B))


def cmd_compare(args, stdout, stderr):
    pf = _load(args)
    iters = args.max_iters or COMPARE_ITERS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if pf.family in ("euclid", "landweber"):
        devs, tr = equivalence_deviation(pf.matrix, pf.data, pf.start, iters)
        w.writerow(["k", "deviation"])
        w.writerows([k, _fmt(d)] for k, d in enumerate(devs, start=1))
        summary = [f"max_deviation: {_fmt(max(devs))}", f"trace_BtB: {_fmt(tr)}"]
    elif pf.family == "hellinger":
        P, x0 = normalize_columns(pf.matrix, pf.start)
        f = solvers.objective("hellinger", P, pf.data)
        trace = run_af(lambda z: solvers.hellinger_T_step(P, pf.data, z), f, x0, StoppingRule(iters, 0.0, 0.0))
        ctx = suite.Context("hellinger", pf.matrix, pf.data, pf.start)
        klh, hell, _ = diag.coincidence_probe(P, pf.data, ctx.x_hat, trace)
        w.writerow(["k", "klh", "hell"])
        w.writerows([k, _fmt(a), _fmt(c)] for k, (a, c) in enumerate(zip(klh, hell)))
        summary = [f"min_klh: {_fmt(np.min(klh))}", f"min_hell: {_fmt(np.min(hell))}"]
    else:
        raise ConfigError(f"compare supports euclid, landweber or hellinger problems, not {pf.family!r}")
    _emit(buf.getvalue(), args.out or f"{args.file}.compare.csv", stdout)
    info = stderr if args.out == "-" else stdout
    for line in summary:
        print(line, file=info)
    return EXIT_OK


def generate(rows, cols, family, seed, consistent=False):
    """Seeded random problem; KL families get normalized positive columns."""
    rng = np.random.default_rng(seed)
    if family in KL_FAMILIES:
        P = rng.uniform(0.1, 1.0, size=(rows, cols))
        P /= P.sum(axis=0)
        x_true = rng.uniform(0.5, 2.0, size=cols)
        data = P @ x_true if consistent else rng.uniform(0.5, 2.0, size=rows)
        start = np.ones(cols)
    else:
        P = rng.normal(size=(rows, cols))
        x_true = rng.uniform(0.5, 2.0, size=cols)
        data = P @ x_true if consistent else rng.normal(size=rows)
        start = np.zeros(cols)
    return ProblemFile(family, P, data, start, {"seed": seed})


def cmd_gen(args, stdout, stderr):
    if args.rows < 1 or args.cols < 1:
        raise ConfigError("--rows and --cols must be at least 1")
    seed = 0 if args.seed is None else args.seed
    pf = generate(args.rows, args.cols, args.family or "smart", seed, args.consistent)
    _emit(format_problem(pf), args.out, stdout)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="amprox", description="Auxiliary-function solvers and property checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_file=True):
        if needs_file:
            sp.add_argument("--file", "-f", required=True, help="problem file")
        sp.add_argument("--family", choices=FAMILIES, help="override the file's family")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", "-o", help="output path ('-' for stdout)")

    s = sub.add_parser("solve", help="run a solver and write its trace")
    common(s)
    s.add_argument("--gamma", type=float, help="Landweber step size")
    s.add_argument("--max-iters", type=int)
    s.add_argument("--f-tol", type=float)
    s.add_argument("--step-tol", type=float)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="run property checks and write a report")
    common(c)
    c.add_argument("--props", help="comma-separated property names: " + ", ".join(suite.PROPERTIES))
    c.add_argument("--all", action="store_true", help="every property that applies to the family")
    c.add_argument("--samples", type=int, default=suite.DEFAULT_SAMPLES)
    c.add_argument("--max-iters", type=int, help="iterations monitored")
    c.set_defaults(func=cmd_check)

    m = sub.add_parser("compare", help="Landweber vs L iteration, or the two Hellinger KL inequalities")
    common(m)
    m.add_argument("--max-iters", type=int)
    m.set_defaults(func=cmd_compare)

    g = sub.add_parser("gen", help="write a seeded random problem file")
    common(g, needs_file=False)
    g.add_argument("--rows", "-I", type=int, default=6)
    g.add_argument("--cols", "-J", type=int, default=4)
    g.add_argument("--consistent", action="store_true", help="data = matrix @ positive x_true")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, stdout, stderr)
    except ProblemFileError as exc:
        print(f"error: {args.file}: {exc}", file=stderr)
    except (ConfigError, DomainError, IterationError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
