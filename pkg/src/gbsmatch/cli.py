"""Command-line interface: ``gbsmatch {haf,encode,prob,figure}``.

Exit codes: 0 success, 2 parse failure, 3 size bound, 4 encodability, 5
numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import graph as gr
from . import hafnian as hf
from . import optimizer as opt
from . import probability as pb
from .circuit import CircuitError, synthesize_mixed, synthesize_pure
from .encoder import EncodingError, check_mixed_conditions, encode_mixed, encode_pure_doubled
from .symplectic import Basis, SymplecticError, basis_convert

EXIT_OK, EXIT_PARSE, EXIT_SIZE, EXIT_ENCODE, EXIT_NUMERIC = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_PARSE, f"{self.prog}: {message}")


def _fraction_hint(x: float) -> str:
    fr = Fraction(x).limit_denominator(1000)
    if abs(float(fr) - x) < 1e-12 and fr.denominator > 1:
        return f" (= {fr.numerator}/{fr.denominator})"
    return ""


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Graph input
# ---------------------------------------------------------------------------


def _add_graph_args(p: argparse.ArgumentParser, required: bool = True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--file", help="edge-list text or JSON graph document")
    g.add_argument("--complete", type=int, metavar="N", help="complete graph K_N")
    g.add_argument("--one-edge-removed", type=int, metavar="N", help="K_N without one edge")
    p.add_argument("--shift", type=float, default=0.0, help="value added to every diagonal entry")


def _load(args) -> gr.Graph:
    try:
        if args.file:
            g = gr.load_graph(args.file)
        elif args.complete is not None:
            g = gr.complete_graph(args.complete)
        elif getattr(args, "one_edge_removed", None) is not None:
            g = gr.one_edge_removed(args.one_edge_removed)
        else:
            raise CliError(EXIT_PARSE, "no graph given")
    except (OSError, gr.GraphError) as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    if getattr(args, "shift", 0.0):
        g = gr.diagonal_shift(g, args.shift)
    return g


# ---------------------------------------------------------------------------
# haf
# ---------------------------------------------------------------------------


def cmd_haf(args) -> int:
    g = _load(args)
    if g.n_vertices % 2:
        value = hf.HafValue.from_int(0)
    elif g.family in ("complete", "one_edge_removed"):
        value = pb.graph_hafnian(g)
    else:
        if g.n_vertices > hf.MAX_BRUTEFORCE_DIM:
            raise CliError(EXIT_SIZE, f"dimension {g.n_vertices} exceeds the enumeration bound {hf.MAX_BRUTEFORCE_DIM}")
        # the diagonal never enters a pairing; dropping it keeps 0/1 inputs exact
        a = np.array(g.matrix, dtype=float)
        np.fill_diagonal(a, 0.0)
        value = hf.haf_bruteforce(a, threads=opt.default_threads())
    if args.json:
        doc = {"n_vertices": g.n_vertices, "exact": value.exact, "approx": value.approx}
        _emit(json.dumps(doc) + "\n", args.out)
    else:
        text = f"{value.exact}\n" if value.exact is not None else f"{value.approx!r}\n"
        if args.verbose:
            text += f"approx {value.approx!r}\n"
        _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# encode
# ---------------------------------------------------------------------------


def _matrix_json(a: np.ndarray) -> list:
    return [[float(x) for x in row] for row in a]


def cmd_encode(args) -> int:
    g = _load(args)
    if g.adjacency is None:
        raise CliError(EXIT_SIZE, "family graphs this large cannot be encoded explicitly")
    try:
        if args.mode == "mixed":
            rep = check_mixed_conditions(g.matrix)
            if not rep.encodable:
                raise CliError(EXIT_ENCODE, f"mixed encoding refused: condition {rep.failed[0]} fails")
            if not 0 < args.c < rep.c_upper:
                raise CliError(EXIT_ENCODE, f"c={args.c} outside (0, c_upper={rep.c_upper:.12g}{_fraction_hint(rep.c_upper)})")
            enc = encode_mixed(g, args.c)
            circ = synthesize_mixed(enc)
        else:
            enc = encode_pure_doubled(g, args.c)
            circ = synthesize_pure(enc)
    except EncodingError as exc:
        msg = str(exc)
        if exc.condition == "c_range":
            top = float(np.max(np.abs(gr.spectrum(g).eigenvalues)))
            bound = 1 / top
            msg += f"; bound {bound:.12g}{_fraction_hint(bound)}"
        raise CliError(EXIT_ENCODE, f"encoding refused ({exc.condition}): {msg}") from exc
    except (SymplecticError, CircuitError, np.linalg.LinAlgError) as exc:
        raise CliError(EXIT_NUMERIC, str(exc)) from exc
    sigma_q = basis_convert(enc.sigma, Basis.QUADRATURE)
    doc = {
        "graph": {"n_vertices": g.n_vertices, "label": g.label},
        "encoding": enc.as_dict(),
        "covariance": {"basis": "heisenberg", "entries": _matrix_json(enc.sigma.entries)},
        "covariance_quadrature": {"basis": "quadrature", "entries": _matrix_json(sigma_q.entries)},
        "circuit": circ.to_json(),
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# prob
# ---------------------------------------------------------------------------


def _pick_mode(g: gr.Graph, mode: str) -> str:
    if mode != "auto":
        return mode
    if g.family == "complete" and g.matchable:
        return "mixed"
    if g.adjacency is not None and g.n_vertices % 2 == 0 and check_mixed_conditions(g.matrix).encodable:
        return "mixed"
    return "pure"


def _graph_logf(g, mode):
    logf, c_upper, lam = opt.graph_objective(g, mode)
    return logf, c_upper, lam


def cmd_prob(args) -> int:
    if args.family:
        return _prob_family(args)
    g = _load(args)
    mode = _pick_mode(g, args.mode)
    try:
        if args.pattern:
            return _prob_pattern(g, args)
        logf, c_upper, lam = _graph_logf(g, mode)
        params = {"graph": g.label or f"n={g.n_vertices}", "shift": args.shift, "mode": mode, "c_upper": repr(c_upper)}
        if args.sweep_c:
            cs = c_upper * np.arange(1, args.points + 1) / (args.points + 1)
            pr = np.exp(logf(cs))
            _emit(pb.format_csv(["c", "probability"], zip(cs, pr), params), args.out)
            return EXIT_OK
        if args.optimize:
            res = opt.optimize_c(g, mode=mode)
            doc = {"mode": mode, **res.as_dict()}
            _emit(json.dumps(doc) + "\n" if args.json else _kv(doc), args.out)
            return EXIT_OK
        if args.c is None:
            raise CliError(EXIT_PARSE, "prob needs --c, --sweep-c or --optimize")
        rep = pb.pr_all_ones_mixed(g, args.c) if mode == "mixed" else pb.pr_all_ones_pure(g, args.c)
    except EncodingError as exc:
        raise CliError(EXIT_ENCODE, f"encoding refused ({exc.condition}): {exc}") from exc
    except hf.HafnianError as exc:
        raise CliError(EXIT_SIZE, str(exc)) from exc
    except (pb.ProbabilityError, opt.OptimizationError) as exc:
        raise CliError(EXIT_NUMERIC, str(exc)) from exc
    doc = {"c": args.c, **rep.as_dict()}
    _emit(json.dumps(doc) + "\n" if args.json else _kv(doc), args.out)
    return EXIT_OK


def _prob_pattern(g, args) -> int:
    from .encoder import sigma_from_matrix

    if args.c is None:
        raise CliError(EXIT_PARSE, "--pattern needs --c")
    pattern = pb.DetectionPattern.parse(args.pattern)
    mode = _pick_mode(g, args.mode)
    a = args.c * g.matrix
    if mode == "pure":
        z = np.zeros_like(a)
        a = np.block([[a, z], [z, a]])
    value = pb.pr_pattern(sigma_from_matrix(a), pattern)
    doc = {"c": args.c, "mode": mode, "pattern": list(pattern.counts), "value": value}
    _emit(json.dumps(doc) + "\n" if args.json else _kv(doc), args.out)
    return EXIT_OK


def _prob_family(args) -> int:
    family = {"extended-complete": "complete", "extended-one-edge-removed": "one_edge_removed"}[args.family]
    if args.m is None or args.n is None:
        raise CliError(EXIT_PARSE, "--family needs --m and --n")
    try:
        if args.optimize:
            res = opt.optimize_cd(args.m, args.n, family, budget_db=args.budget_db)
            doc = {"family": args.family, "m": args.m, "n": args.n, **res.as_dict()}
            _emit(json.dumps(doc) + "\n" if args.json else _kv(doc), args.out)
            return EXIT_OK
        d = args.d or 0.0
        if args.sweep_c:
            c_upper = 1 / pb.extended_lambda_max(args.m, args.n, d, family)
            cs = c_upper * np.arange(1, args.points + 1) / (args.points + 1)
            pr = np.exp(pb.log_pr_extended(args.m, args.n, cs, d, family))
            params = {"family": args.family, "m": args.m, "n": args.n, "d": d}
            _emit(pb.format_csv(["c", "probability"], zip(cs, pr), params), args.out)
            return EXIT_OK
        if args.c is None:
            raise CliError(EXIT_PARSE, "prob needs --c, --sweep-c or --optimize")
        spec = pb.ExtendedFamilySpec(args.m, args.n, args.c, d, family)
        value = pb.pr_extended_complete(spec) if family == "complete" else pb.pr_extended_one_edge_removed(spec)
    except (pb.ProbabilityError, opt.OptimizationError) as exc:
        raise CliError(EXIT_NUMERIC, str(exc)) from exc
    doc = {"family": args.family, "m": args.m, "n": args.n, "c": args.c, "d": d, "value": value}
    _emit(json.dumps(doc) + "\n" if args.json else _kv(doc), args.out)
    return EXIT_OK


def _kv(doc: dict) -> str:
    return "".join(f"{k}: {v}\n" for k, v in doc.items())


# ---------------------------------------------------------------------------
# figure
# ---------------------------------------------------------------------------


def _curve(logf, c_upper, points):
    cs = c_upper * np.arange(1, points + 1) / (points + 1)
    return list(zip(cs, np.exp(logf(cs))))


def _pair_figure(name, base, shift, mode, points):
    out = {}
    for tag, d in (("unshifted", 0.0), ("shifted", shift)):
        g = gr.diagonal_shift(base, d) if d else base
        logf, c_upper, _ = opt.graph_objective(g, mode)
        params = {"figure": name, "graph": base.label, "shift": d, "mode": mode, "c_upper": repr(c_upper)}
        out[f"{name}_{tag}.csv"] = pb.format_csv(["c", "probability"], _curve(logf, c_upper, points), params)
    return out


def figure_data(name: str, points: int = 200) -> dict[str, str]:
    """CSV text per output file name for one of the reproducible figures."""
    if name == "fig4":
        return _pair_figure(name, gr.complete_graph(20), -6.0, "mixed", points)
    if name == "figA_prob4m":
        return _pair_figure(name, gr.complete_graph(4), -2 / 3, "pure", points)
    if name == "figA_prob2m":
        return _pair_figure(name, gr.complete_graph(4), -2 / 3, "mixed", points)
    if name == "fig6":
        rows = [(2 * m, opt.max_squeezing_db(m, 16)) for m in range(1, 101)]
        return {"fig6.csv": pb.format_csv(["two_m", "squeezing_db"], rows, {"figure": name, "n": 16})}
    if name == "fig7":
        rows = []
        for two_m in (10, 20, 40, 80):
            for db in np.arange(1.0, 30.5, 1.0):
                res = opt.pr_at_squeezing_budget(two_m // 2, 16, float(db))
                rows.append((float(db), res.pr_star, two_m))
        return {"fig7.csv": pb.format_csv(["squeezing_db", "probability", "two_m"], rows, {"figure": name, "n": 16})}
    if name == "fig8":
        m, n = 2500, 64
        best = opt.optimize_cd(m, n)
        ds = np.linspace(0.0, 2 * best.d_star, 41)
        cs = np.linspace(0.0, 2 * best.c_star, 41)[1:]
        rows = []
        for d in ds:
            pr = np.exp(pb.log_pr_extended(m, n, cs, d, "complete"))
            rows.extend((c, d, p) for c, p in zip(cs, pr))
        params = {"figure": name, "m": m, "n": n, "c_star": repr(best.c_star), "d_star": repr(best.d_star),
                  "pr_star": repr(best.pr_star)}
        return {"fig8.csv": pb.format_csv(["c", "d", "probability"], rows, params)}
    raise CliError(EXIT_PARSE, f"unknown figure {name!r}")


FIGURES = ("fig4", "fig6", "fig7", "fig8", "figA_prob4m", "figA_prob2m")


def cmd_figure(args) -> int:
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    for fname, text in figure_data(args.name, args.points).items():
        (outdir / fname).write_text(text)
        if args.verbose:
            print(outdir / fname)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gbsmatch", description="Perfect-matching counts through Gaussian boson sampling formulas")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    h = sub.add_parser("haf", help="hafnian / perfect-matching count")
    _add_graph_args(h)
    h.add_argument("--json", action="store_true")
    h.add_argument("--out")
    h.set_defaults(func=cmd_haf)

    e = sub.add_parser("encode", help="covariance matrix, parameters and circuit as JSON")
    _add_graph_args(e)
    e.add_argument("--c", type=float, required=True)
    e.add_argument("--mode", choices=("mixed", "pure"), default="mixed")
    e.add_argument("--out")
    e.set_defaults(func=cmd_encode)

    q = sub.add_parser("prob", help="detection probabilities")
    _add_graph_args(q, required=False)
    q.add_argument("--family", choices=("extended-complete", "extended-one-edge-removed"))
    q.add_argument("--m", type=int)
    q.add_argument("--n", type=int)
    q.add_argument("--c", type=float)
    q.add_argument("--d", type=float, help="diagonal value subtracted in the extended families")
    q.add_argument("--mode", choices=("auto", "mixed", "pure"), default="auto")
    q.add_argument("--pattern", help="0/1 pattern, e.g. 1,1,0,1")
    q.add_argument("--sweep-c", action="store_true")
    q.add_argument("--points", type=int, default=200)
    q.add_argument("--optimize", action="store_true")
    q.add_argument("--budget-db", type=float)
    q.add_argument("--json", action="store_true")
    q.add_argument("--out")
    q.set_defaults(func=cmd_prob)

    f = sub.add_parser("figure", help="write figure data as CSV")
    f.add_argument("name", choices=FIGURES)
    f.add_argument("--out", help="output directory (default: current)")
    f.add_argument("--points", type=int, default=200)
    f.set_defaults(func=cmd_figure)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "family", None) is None and args.command == "prob" and not (
            args.file or args.complete is not None or args.one_edge_removed is not None
        ):
            raise CliError(EXIT_PARSE, "prob needs a graph (--file/--complete/--one-edge-removed) or --family")
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FloatingPointError as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
