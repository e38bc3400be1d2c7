"""Plain-text problem files.

A problem file is a ``key = value`` header followed by three numeric
tables, each introduced by a ``[name]`` line::

    # comments start with '#'
    family = smart
    max_iters = 1000
    step_tol = 1e-12

    [matrix]
    0.5
    0.5
    [data]
    1 3
    [start]
    1

Rows of ``[matrix]`` are matrix rows; ``[data]`` and ``[start]`` may span
several lines. Numbers are separated by whitespace or commas.
Recognized header keys: family, gamma, max_iters, f_tol, step_tol, seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .framework import StoppingRule
from .model import FAMILIES, ProblemInstance

__all__ = ["ProblemFile", "ProblemFileError", "parse_problem", "load_problem", "format_problem"]

OPTION_TYPES = {"gamma": float, "max_iters": int, "f_tol": float, "step_tol": float, "seed": int}
TABLES = ("matrix", "data", "start")


class ProblemFileError(DomainError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass
class ProblemFile:
    family: str
    matrix: np.ndarray
    data: np.ndarray
    start: np.ndarray
    options: dict = field(default_factory=dict)

    def instance(self, family=None):
        fam = family or self.family
        try:
            return ProblemInstance(fam, self.matrix, self.data, self.start)
        except DomainError as exc:
            raise ProblemFileError(str(exc)) from exc

    def rule(self, **overrides):
        kw = {k: self.options[k] for k in ("max_iters", "f_tol", "step_tol") if k in self.options}
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return StoppingRule(**kw)


def _numbers(text, lineno, table):
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise ProblemFileError(f"non-numeric entry in {text.strip()!r}", lineno, table) from None


def parse_problem(text):
    header = {}
    rows = {name: [] for name in TABLES}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in rows:
                raise ProblemFileError(f"unknown table [{current}]", lineno, current)
            if rows[current]:
                raise ProblemFileError(f"table [{current}] given twice", lineno, current)
            continue
        if current is None:
            if "=" not in line:
                raise ProblemFileError(f"expected 'key = value', got {line!r}", lineno)
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lower().replace("-", "_")
            if key == "family":
                if value not in FAMILIES:
                    raise ProblemFileError(f"unknown family {value!r}; expected one of {FAMILIES}", lineno, key)
                header[key] = value
            elif key in OPTION_TYPES:
                try:
                    header[key] = OPTION_TYPES[key](value)
                except ValueError:
                    raise ProblemFileError(f"cannot read {value!r} as {OPTION_TYPES[key].__name__}",
                                           lineno, key) from None
            else:
                raise ProblemFileError(f"unknown header key {key!r}", lineno, key)
            continue
        rows[current].append((lineno, _numbers(line, lineno, current)))

    if "family" not in header:
        raise ProblemFileError("missing 'family' in header", field="family")
    for name in TABLES:
        if not rows[name]:
            raise ProblemFileError(f"missing table [{name}]", field=name)
    widths = {len(r) for _, r in rows["matrix"]}
    if len(widths) != 1:
        bad = next(ln for ln, r in rows["matrix"] if len(r) != len(rows["matrix"][0][1]))
        raise ProblemFileError("matrix rows have different lengths", bad, "matrix")
    matrix = np.array([r for _, r in rows["matrix"]], dtype=float)
    data = np.array([v for _, r in rows["data"] for v in r], dtype=float)
    start = np.array([v for _, r in rows["start"] for v in r], dtype=float)
    if data.size != matrix.shape[0]:
        raise ProblemFileError(f"data has {data.size} entries but matrix has {matrix.shape[0]} rows",
                               rows["data"][0][0], "data")
    if start.size != matrix.shape[1]:
        raise ProblemFileError(f"start has {start.size} entries but matrix has {matrix.shape[1]} columns",
                               rows["start"][0][0], "start")
    family = header.pop("family")
    pf = ProblemFile(family, matrix, data, start, header)
    pf.instance()  # family-specific positivity checks
    return pf


def load_problem(path):
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def _fmt(v):
    return format(float(v), ".17g")


def format_problem(pf):
    lines = ["# amprox problem file", f"family = {pf.family}"]
    for key in OPTION_TYPES:
        if key in pf.options:
            lines.append(f"{key} = {pf.options[key]}")
    lines.append("")
    lines.append("[matrix]")
    lines.extend(" ".join(_fmt(v) for v in row) for row in np.atleast_2d(pf.matrix))
    lines.append("[data]")
    lines.append(" ".join(_fmt(v) for v in pf.data))
    lines.append("[start]")
    lines.append(" ".join(_fmt(v) for v in pf.start))
    return "\n".join(lines) + "\n"
