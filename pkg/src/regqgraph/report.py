"""Delimited and JSON emission with fixed headers.

CSV cells print wavenumbers with 6 decimals and errors in 6-digit scientific
notation so output is byte stable; JSON keeps full float precision.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import __version__

ROOT_HEADER = ("n", "k_hat", "k_exact", "zone_lo", "zone_hi")
ORBIT_HEADER = ("code", "nu", "code_length", "action", "weight")
CONVERGENCE_HEADER = ("n", "l", "k_expansion", "k_exact", "abs_err", "rel_err")
NUMERIC_HEADER = ("n", "l", "k_numeric", "k_exact", "rel_err")
EIGENVALUE_HEADER = ("n", "method", "l", "k_hat", "k", "k_exact", "abs_err")
REGION_HEADER = ("kind", "r2", "r3", "regular")
COUNT_HEADER = ("l", "necklaces", "cumulative", "entropy", "exp_entropy")


@dataclass(frozen=True)
class EigenvalueRecord:
    n: int
    method: str
    l: int | None
    k_hat: float
    k: float
    k_exact: float

    @property
    def abs_err(self) -> float:
        return abs(self.k - self.k_exact)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def fmt_err(value: float) -> str:
    return f"{value:.6e}"


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def to_json(kind: str, header: Sequence[str], rows: Iterable[Sequence], **meta) -> str:
    records = [dict(zip(header, row)) for row in rows]
    for rec in records:
        for key, val in rec.items():
            if isinstance(val, float) and not math.isfinite(val):
                rec[key] = None
    payload = {"kind": kind, "version": __version__, "meta": meta, "rows": records}
    return json.dumps(payload, indent=2) + "\n"


def eigenvalue_cells(rec: EigenvalueRecord):
    return (rec.n, rec.method, rec.l, fmt(rec.k_hat), fmt(rec.k), fmt(rec.k_exact),
            fmt_err(rec.abs_err))


def eigenvalue_values(rec: EigenvalueRecord):
    return (rec.n, rec.method, rec.l, rec.k_hat, rec.k, rec.k_exact, rec.abs_err)


def convergence_cells(row):
    return (row.n, row.l, fmt(row.k_expansion), fmt(row.k_exact), fmt_err(row.abs_err),
            fmt_err(row.rel_err))


def convergence_values(row):
    return (row.n, row.l, row.k_expansion, row.k_exact, row.abs_err, row.rel_err)


def table1_text(rows, l_values, term_counts) -> str:
    """Grid of ``k_n(l)`` with the exact column and ``|k_n(l_max) - k_n|``."""
    levels = sorted({r.n for r in rows})
    by = {(r.n, r.l): r for r in rows}
    l_last = max(l_values)
    head = ["root"] + [f"l={l}" for l in l_values] + ["exact", "error"]
    lines = ["  ".join(f"{h:>12}" for h in head)]
    for n in levels:
        cells = [f"k_{n}"] + [f"{by[n, l].k_expansion:.6f}" for l in l_values]
        cells += [f"{by[n, l_last].k_exact:.6f}", f"{by[n, l_last].abs_err:.5f}"]
        lines.append("  ".join(f"{c:>12}" for c in cells))
    lines.append("  ".join(f"{c:>12}" for c in ["terms"] + [str(term_counts[l]) for l in l_values]))
    return "\n".join(lines) + "\n"
