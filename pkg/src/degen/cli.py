"""Command-line front end: ``degen <subcommand> [flags]``.

Exit codes: 0 success, 1 failed check (oracle disagreement, threshold
counterexample, bridge disagreement), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bipartite, models, montecarlo
from .asymptotics import predict_distinct
from .polynomial import DEFAULT_ROOT_TOL, Polynomial, discriminant, discriminant_scale, has_multiple_root
from .scalars import format_exact

log = logging.getLogger("degen")


class UsageError(Exception):
    pass


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _config(args, n=None, c=None) -> montecarlo.SimulationConfig:
    if args.model == "asym" and args.q is not None:
        raise UsageError("--q only applies to --model sym")
    try:
        return montecarlo.SimulationConfig(
            model=args.model,
            n=args.n if n is None else n,
            c=args.c if c is None else c,
            q=args.q,
            trials=args.trials,
            seed=args.seed,
            target=args.target,
            p_override=args.p_override,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _report_text(reports, as_csv: bool) -> str:
    if not as_csv:
        dicts = [r.to_dict(timing=False) for r in reports]
        return _json(dicts[0] if len(dicts) == 1 else dicts)
    if isinstance(reports[0], montecarlo.HistogramReport):
        rows = []
        for r in reports:
            for x, pr in r.poisson_pmf.items():
                rows.append([r.model, r.n, r.c, r.q, r.seed, x, r.counts.get(x, 0), r.empirical_pmf.get(x, 0.0), pr])
        return _csv_text(["model", "N", "c", "q", "seed", "x", "count", "empirical", "poisson"], rows)
    return _csv_text(montecarlo.CSV_COLUMNS, [r.csv_row() for r in reports])


def _log_runtime(reports):
    for r in reports:
        log.info("N=%d c=%g target=%s: %.2f s", r.n, r.c, r.target, r.runtime_seconds)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    try:
        report = montecarlo.run(cfg)
    except montecarlo.BridgeDisagreement as exc:
        print(f"degen: {exc}\nmask:\n{exc.mask_text}", file=sys.stderr)
        if args.dump_matrix and exc.matrix is not None:
            Path(args.dump_matrix).write_text(models.format_matrix_text(exc.matrix))
        return 1
    _log_runtime([report])
    _emit(_report_text([report], args.csv), args.out)
    return 0


def cmd_sweep(args) -> int:
    if not args.n or not args.c:
        raise UsageError("sweep needs at least one --n and one --c value")
    base = _config(args, n=args.n[0], c=args.c[0])
    pairs = montecarlo.config_grid(args.n, args.c)
    try:
        reports = montecarlo.run_sweep(pairs, base)
    except montecarlo.BridgeDisagreement as exc:
        print(f"degen: {exc}\nmask:\n{exc.mask_text}", file=sys.stderr)
        return 1
    _log_runtime(reports)
    _emit(_report_text(reports, args.csv), args.out)
    return 0


def cmd_predict(args) -> int:
    if args.model == "asym" and args.q is not None:
        raise UsageError("--q only applies to --model sym")
    try:
        pred = predict_distinct(args.c, args.model, args.q or 0.0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    d = pred.to_dict()
    x = pred.lambda_or_mu
    d["p_perfect_matching"] = float(np.exp(-x))
    _emit(_json(d), args.out)
    return 0


def cmd_oracle(args) -> int:
    model_list = [args.model] if args.model else ["asym", "sym"]
    summaries = []
    for model in model_list:
        max_n = args.max_n
        if args.model is None and model == "asym":
            max_n = min(max_n, 3)
        try:
            summaries.append(montecarlo.oracle_equivalence_scan(max_n, args.samples, model, args.seed))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    ok = all(s["ok"] for s in summaries)
    _emit(_json({"ok": ok, "scans": summaries}), args.out)
    return 0 if ok else 1


def cmd_threshold(args) -> int:
    try:
        summary = montecarlo.threshold_scan(args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(_json(summary), args.out)
    return 0 if summary["ok"] else 1


def _witness_json(w) -> dict | None:
    if w is None:
        return None
    return {"k": w.k, "side": w.side, "I": sorted(w.I), "J": sorted(w.J)}


def cmd_graph(args) -> int:
    if not args.input:
        raise UsageError("graph needs --in <mask file>")
    try:
        G = bipartite.parse_mask_text(Path(args.input).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read mask: {exc}") from None
    out = {"n": G.n, "symmetric": G.symmetric, "edges": G.edge_count, "check": args.check}
    if args.check == "pm":
        m = bipartite.maximum_matching(G)
        out["result"] = m.is_perfect
        out["matching"] = sorted([j, l] for j, l in m.pairs.items())
        hv = bipartite.hall_violation_witness(G)
        out["hall_violator"] = None if hv is None else {"side": hv.side, "I": sorted(hv.I), "gamma": sorted(hv.gamma)}
    elif args.check == "cond41":
        out["result"] = bipartite.condition_4_1(G)
    elif args.check in ("cond411", "cond53"):
        try:
            w = bipartite.condition_4_11(G) if args.check == "cond411" else bipartite.condition_5_3(G)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        out["result"] = w is not None
        out["witness"] = _witness_json(w)
    else:
        sample = models.symmetric_distinct_witness(G) if G.symmetric else models.distinct_witness_for_mask(G)
        out["result"] = sample is not None
        if sample is not None:
            out["values"] = sample.values.tolist()
            eigs = models.eigenvalues(sample.values)
            out["eigenvalues"] = [[float(z.real), float(z.imag)] for z in eigs]
            if args.dump_matrix:
                Path(args.dump_matrix).write_text(models.format_matrix_text(sample.values))
    _emit(_json(out), args.out)
    return 0


def _parse_coeffs(text: str, exact: bool) -> list:
    parts = [s.strip() for s in text.split(",") if s.strip()]
    if not parts:
        raise UsageError("--coeffs needs at least one coefficient")
    try:
        if exact:
            return [Fraction(s) for s in parts]
        return [complex(s.replace("i", "j")) if ("j" in s or "i" in s) else float(s) for s in parts]
    except ValueError as exc:
        raise UsageError(f"bad coefficient list {text!r}: {exc}") from None


def _number_json(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return float(x)


def cmd_discriminant(args) -> int:
    if args.coeffs is None:
        raise UsageError("discriminant needs --coeffs a0,a1,...,a_{n-1}")
    p = Polynomial(tuple(_parse_coeffs(args.coeffs, args.exact)))
    d = discriminant(p)
    out = {"degree": p.degree, "exact": p.exact}
    if p.exact:
        out["discriminant"] = format_exact(d)
    else:
        z = complex(d)
        out["discriminant"] = _number_json(z if z.imag else z.real + 0.0)  # no "-0.0"
        out["tol"] = DEFAULT_ROOT_TOL
        out["scale"] = discriminant_scale(p)
    out["multiple_root"] = has_multiple_root(p)
    _emit(_json(out), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="degen", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", help="write the report to this path instead of stdout")

    def add_experiment(p, many: bool):
        p.add_argument("--model", choices=montecarlo.MODELS, default="asym")
        if many:
            p.add_argument("--n", type=int, nargs="+", required=True)
            p.add_argument("--c", type=float, nargs="+", default=[0.0])
        else:
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--c", type=float, default=0.0)
        p.add_argument("--q", type=float, help="diagonal edge probability (sym only, default 0)")
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--target", choices=montecarlo.TARGETS, default="cond41")
        p.add_argument("--p-override", type=float, help="fixed edge probability instead of (log N + c)/N")
        p.add_argument("--csv", action="store_true", help="CSV instead of JSON")
        add_out(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimate for one configuration")
    add_experiment(p, many=False)
    p.add_argument("--dump-matrix", help="on a bridge failure, write the offending matrix here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="one row per (N, c) in the product of --n and --c")
    add_experiment(p, many=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("predict", help="limit probabilities")
    p.add_argument("--model", choices=montecarlo.MODELS, default="asym")
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--q", type=float)
    add_out(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("oracle", help="exhaustive graph-vs-eigenvalue agreement scan")
    p.add_argument("--model", choices=montecarlo.MODELS, help="default: both")
    p.add_argument("--max-n", type=int, default=3)
    p.add_argument("--samples", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    add_out(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("threshold", help="exhaustive edge-count threshold scan")
    p.add_argument("--n", type=int, required=True)
    add_out(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("graph", help="structural checks on a mask file")
    p.add_argument("--in", dest="input", required=True, help="mask text file")
    p.add_argument("--check", choices=("pm", "cond41", "cond411", "cond53", "witness"), default="cond41")
    p.add_argument("--dump-matrix", help="write the witness matrix here")
    add_out(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("discriminant", help="discriminant of a monic polynomial")
    p.add_argument("--coeffs", required=True, help="a0,a1,...,a_{n-1} (leading 1 implied); use --coeffs=-1,0 when a0 is negative")
    p.add_argument("--exact", action="store_true", help="parse coefficients as exact rationals")
    add_out(p)
    p.set_defaults(func=cmd_discriminant)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"degen: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
