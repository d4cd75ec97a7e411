"""Command-line front end.

Exit codes: 0 success, 1 I/O or parse error, 2 domain error (tunneling
regime, non-regular graph, quadrature failure, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import report
from .errors import ConfigError, DomainError, GraphError, TunnelingRegimeError
from .expansion import convergence_report, eigenvalue_expansion, shared_table
from .graph import as_linear, load_graph, validate
from .orbits import enumerate_orbit_terms, necklace_count, topological_entropy
from .scattering import graph_s_matrix, spectral_determinant
from .spectral import (exact_roots, four_vertex_classification, four_vertex_region, regularity,
                       require_regular, root_windows, separators, trig_equation)
from .tracesum import DEFAULT_EPS, numeric_sweep

TABLE1_LEVELS = [1, 10, 100]
TABLE1_L = [5, 10, 15, 20]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_int_list(text: str) -> list[int]:
    """``"1,10,100"`` or ranges ``"2-150"`` (inclusive), comma separated."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part[1:]:
                a, b = part.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("values must be integers >= 1")
    return out


def _load(args):
    graph = load_graph(args.config)
    problems = validate(graph)
    if problems:
        cls = TunnelingRegimeError if any("tunneling" in p for p in problems) else GraphError
        raise cls("; ".join(problems))
    return graph


def _emit(args, text: str):
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _threads(args) -> int:
    return args.threads if args.threads and args.threads > 0 else (os.cpu_count() or 1)


def _parallel_map(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cmd_solve(args):
    graph = _load(args)
    lin = as_linear(graph)
    eq = trig_equation(lin)
    require_regular(eq)
    levels = args.levels
    exact = dict(zip(levels, exact_roots(eq, levels).tolist()))
    k_hat = dict(zip(levels, np.atleast_1d(separators(eq, levels)).tolist()))
    if args.method == "exact":
        records = [report.EigenvalueRecord(n, "exact", None, k_hat[n], exact[n], exact[n])
                   for n in levels]
    elif args.method == "expansion":
        table = shared_table(lin, max(args.l))
        grid = [(n, l) for n in levels for l in args.l]
        values = _parallel_map(lambda nl: eigenvalue_expansion(lin, nl[0], nl[1], table, eq),
                               grid, _threads(args))
        records = [report.EigenvalueRecord(n, "expansion", l, k_hat[n], v, exact[n])
                   for (n, l), v in zip(grid, values)]
    else:
        sweeps = _parallel_map(lambda n: numeric_sweep(lin, n, args.l, args.eps, eq=eq),
                               levels, _threads(args))
        records = [report.EigenvalueRecord(n, "trace", l, k_hat[n], float(v), exact[n])
                   for n, sweep in zip(levels, sweeps) for l, v in zip(args.l, sweep)]
    if args.format == "json":
        text = report.to_json("eigenvalues", report.EIGENVALUE_HEADER,
                              [report.eigenvalue_values(r) for r in records],
                              graph=graph.digest(), method=args.method, eps=args.eps)
    else:
        text = report.to_csv(report.EIGENVALUE_HEADER, [report.eigenvalue_cells(r) for r in records])
    _emit(args, text)


def cmd_roots(args):
    eq = trig_equation(as_linear(_load(args)))
    require_regular(eq)
    ns = args.levels
    k = exact_roots(eq, ns)
    lo, hi, zlo, zhi = root_windows(eq, ns)
    rows = list(zip(ns, hi.tolist(), k.tolist(), zlo.tolist(), zhi.tolist()))
    if args.format == "json":
        text = report.to_json("roots", report.ROOT_HEADER, rows, alpha=eq.alpha, mu=eq.mu,
                              gamma0=eq.gamma0, total_action=eq.total_action)
    else:
        text = report.to_csv(report.ROOT_HEADER,
                             [(r[0],) + tuple(report.fmt(x) for x in r[1:]) for r in rows])
    _emit(args, text)


def cmd_table1(args):
    graph = _load(args)
    lin = as_linear(graph)
    rows = convergence_report(lin, args.levels, args.l, threads=_threads(args))
    counts = {l: sum(necklace_count(m) for m in range(1, l + 1)) for l in args.l}
    if args.format == "csv":
        text = report.to_csv(report.CONVERGENCE_HEADER, [report.convergence_cells(r) for r in rows])
    elif args.format == "json":
        text = report.to_json("convergence", report.CONVERGENCE_HEADER,
                              [report.convergence_values(r) for r in rows],
                              graph=graph.digest(), term_counts={str(l): c for l, c in counts.items()})
    else:
        text = report.table1_text(rows, args.l, counts)
    _emit(args, text)


def cmd_figure_data(args):
    if args.figure == 5:
        r2, upper, lower = four_vertex_region(args.grid)
        rows = [("upper", x, y, 0) for x, y in zip(r2.tolist(), upper.tolist())]
        rows += [("lower", x, y, 0) for x, y in zip(r2.tolist(), lower.tolist())]
        g2, g3, regular = four_vertex_classification(args.grid)
        rows += [("grid", x, y, int(f)) for x, y, f in
                 zip(g2.ravel().tolist(), g3.ravel().tolist(), regular.ravel().tolist())]
        if args.format == "json":
            text = report.to_json("figure5", report.REGION_HEADER, rows, grid=args.grid)
        else:
            text = report.to_csv(report.REGION_HEADER,
                                 [(k, f"{x:.7f}", f"{y:.7f}", f) for k, x, y, f in rows])
        _emit(args, text)
        return
    graph = _load(args)
    lin = as_linear(graph)
    eq = trig_equation(lin)
    require_regular(eq)
    exact = dict(zip(args.levels, exact_roots(eq, args.levels).tolist()))
    sweeps = _parallel_map(lambda n: numeric_sweep(lin, n, args.l, args.eps, eq=eq),
                           args.levels, _threads(args))
    rows = [(n, l, float(v), exact[n], abs(float(v) - exact[n]) / exact[n])
            for n, sweep in zip(args.levels, sweeps) for l, v in zip(args.l, sweep)]
    if args.format == "json":
        text = report.to_json("figure4", report.NUMERIC_HEADER, rows, graph=graph.digest(),
                              eps=args.eps)
    else:
        text = report.to_csv(report.NUMERIC_HEADER,
                             [(n, l, report.fmt(v), report.fmt(e), report.fmt_err(r))
                              for n, l, v, e, r in rows])
    _emit(args, text)


def cmd_orbits(args):
    l_max = max(args.l)
    rows = []
    cumulative = 0
    for l in range(1, l_max + 1):
        count = necklace_count(l)
        cumulative += count
        ent = topological_entropy(l) if l >= 2 else None
        rows.append((l, count, cumulative, ent.value if ent else None,
                     ent.exp_value if ent else None))
    extra = {str(l): topological_entropy(l).exp_value for l in (args.entropy_l or [])}
    if args.dump:
        graph = _load(args)
        terms = list(enumerate_orbit_terms(graph, l_max))
        header = report.ORBIT_HEADER
        data = [(t.prime if isinstance(t.prime, str) else " ".join(map(str, t.prime)),
                 t.nu, t.code_length, t.action, t.weight) for t in terms]
        if args.format == "json":
            text = report.to_json("orbits", header, data, graph=graph.digest())
        else:
            text = report.to_csv(header, [(c, nu, m, f"{s:.7f}", f"{w:.7f}")
                                          for c, nu, m, s, w in data])
    elif args.format == "json":
        text = report.to_json("orbit_counts", report.COUNT_HEADER, rows, exp_entropy=extra)
    elif args.format == "csv":
        text = report.to_csv(report.COUNT_HEADER,
                             [(l, c, cum, "" if e is None else f"{e:.6f}",
                               "" if x is None else f"{x:.6f}") for l, c, cum, e, x in rows])
    else:
        lines = [f"{'l':>5} {'N(l)':>12} {'#(l)':>14} {'exp(Lambda)':>12}"]
        for l, c, cum, _, x in rows:
            lines.append(f"{l:>5} {c:>12} {cum:>14} {'' if x is None else f'{x:.6f}':>12}")
        for l, x in extra.items():
            lines.append(f"exp(Lambda({l})) = {x:.6f}   (Lambda <= ln 2 asymptotically)")
        text = "\n".join(lines) + "\n"
    _emit(args, text)


def cmd_smatrix(args):
    graph = _load(args)
    sm = graph_s_matrix(graph, args.k)
    payload = {
        "k": args.k,
        "graph": graph.digest(),
        "S": {"re": sm.S.real.tolist(), "im": sm.S.imag.tolist()},
        "dS_dk": {"re": sm.dS.real.tolist(), "im": sm.dS.imag.tolist()},
        "unitarity_defect": sm.unitarity_defect(),
        "det_1_minus_S": {"re": float(np.real(spectral_determinant(graph, args.k))),
                          "im": float(np.imag(spectral_determinant(graph, args.k)))},
    }
    _emit(args, json.dumps(payload, indent=2) + "\n")


def cmd_validate(args):
    graph = load_graph(args.config)
    problems = validate(graph)
    lines = problems or ["ok"]
    try:
        eq = trig_equation(as_linear(graph), determine=False)
        alpha, ok = regularity(eq)
        lines.append(f"alpha={alpha:.6f} regular={'yes' if ok else 'no'}")
    except DomainError as exc:
        lines.append(f"no trigonometric form: {exc}")
    _emit(args, "\n".join(lines) + "\n")
    if problems:
        raise GraphError("; ".join(problems))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="regqgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config_required=True, formats=("csv", "json"), default="csv"):
        p.add_argument("--config", required=config_required, help="graph definition (JSON)")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--threads", type=int, default=0, help="worker threads (0: all cores)")

    p = sub.add_parser("solve", help="eigenvalues by one of the three methods")
    common(p)
    p.add_argument("--method", choices=("exact", "expansion", "trace"), default="exact")
    p.add_argument("--levels", type=parse_int_list, default=TABLE1_LEVELS)
    p.add_argument("--l", type=parse_int_list, default=[20], help="code-length truncation(s)")
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("roots", help="exact roots with separators and allowed zones")
    common(p)
    p.add_argument("--levels", type=parse_int_list, default=list(range(1, 11)))
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("table1", help="convergence grid of the orbit series")
    common(p, formats=("text", "csv", "json"), default="text")
    p.add_argument("--levels", type=parse_int_list, default=TABLE1_LEVELS)
    p.add_argument("--l", type=parse_int_list, default=TABLE1_L)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("figure-data", help="plot data: 4 = trace-method errors, 5 = regular region")
    common(p, config_required=False)
    p.add_argument("--figure", type=int, choices=(4, 5), required=True)
    p.add_argument("--levels", type=parse_int_list, default=TABLE1_LEVELS)
    p.add_argument("--l", type=parse_int_list, default=list(range(2, 151)))
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--grid", type=int, default=41)
    p.set_defaults(func=cmd_figure_data)

    p = sub.add_parser("orbits", help="necklace counts, entropy, optional orbit dump")
    common(p, config_required=False, formats=("text", "csv", "json"), default="text")
    p.add_argument("--l", type=parse_int_list, default=[20])
    p.add_argument("--entropy-l", type=parse_int_list, default=[150, 1000])
    p.add_argument("--dump", action="store_true", help="list (code, nu, action, weight) terms")
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("smatrix", help="dump S(k) and dS/dk as JSON")
    common(p, formats=("json",), default="json")
    p.add_argument("--k", type=float, required=True)
    p.set_defaults(func=cmd_smatrix)

    p = sub.add_parser("validate", help="check a graph definition")
    common(p, formats=("text",), default="text")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "figure-data" and args.figure == 4 and not args.config:
        parser.error("--config is required for --figure 4")
    if args.command == "orbits" and args.dump and not args.config:
        parser.error("--config is required with --dump")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1
    return 0
