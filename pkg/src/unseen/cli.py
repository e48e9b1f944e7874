"""Command-line front end: ``unseen {estimate,bootstrap,simulate,bench}``."""

from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
from pathlib import Path
from typing import Optional, TextIO

from . import __version__
from .bench import FAMILIES, mixture_spec, run_bench, summarize
from .bootstrap import bagged_estimate
from .estimator import estimate
from .histogram import CountHistogram, HistogramError, parse_counts, parse_histogram
from .moments import MAX_ORDER_CAP
from .quadrature import DEFAULT_FLOOR
from .simulate import (
    MixtureSpec,
    PowerLawSpec,
    ScrnaSpec,
    make_rng,
    sample_mixture,
    sample_power_law,
    sample_scrna,
)

SCHEMA_PATH = Path(__file__).with_name("report.schema.json")


class CliError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    if v is None:
        return "NA"
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def write_report(report: dict, fmt: str, out: TextIO) -> None:
    if fmt == "json":
        out.write(json.dumps(_json_safe(report), indent=2) + "\n")
    else:
        for key, value in report.items():
            out.write(f"{key}\t{_fmt(value)}\n")
    out.flush()


def _load_histogram(args) -> CountHistogram:
    if bool(args.hist) == bool(args.counts):
        raise CliError("give exactly one of --hist or --counts")
    path = args.hist or args.counts
    try:
        with open(path) as f:
            return parse_histogram(f) if args.hist else parse_counts(f)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except HistogramError as exc:
        raise CliError(f"{path}: {exc}") from None


def _seed(args, err: TextIO) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(63)
    err.write(f"seed: {seed}\n")
    return seed


def estimate_report(h: CountHistogram, max_order: int, floor: float) -> dict:
    est = estimate(h, max_order, floor)
    return {
        "n0_hat": est.n0_hat,
        "s_hat": est.S_hat,
        "order": est.order_used,
        "fallback": est.fallback,
        "points": list(est.rule.points),
        "weights": list(est.rule.weights),
        "D": h.D,
        "N": h.N,
    }


def cmd_estimate(args, out, err) -> int:
    h = _load_histogram(args)
    write_report(estimate_report(h, args.max_order, args.floor), args.format, out)
    return 0


def cmd_bootstrap(args, out, err) -> int:
    if args.reps < 2:
        raise CliError("--reps must be >= 2")
    h = _load_histogram(args)
    seed = _seed(args, err)
    report = estimate_report(h, args.max_order, args.floor)
    summ = bagged_estimate(h, args.reps, args.max_order, args.floor, seed=seed, threads=args.threads)
    report.update(
        {
            "bagged": summ.bagged_n0,
            "bagged_s": summ.bagged_S,
            "variance": summ.variance,
            "var_within": summ.var_within,
            "var_between": summ.var_between,
            "ci": [summ.ci_lower, summ.ci_upper],
            "replicates": summ.replicates,
            "n_failed": summ.n_failed,
            "seed": seed,
        }
    )
    write_report(report, args.format, out)
    return 0


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _sim_spec(args):
    """Build a spec from --spec JSON or inline flags."""
    params = {}
    if args.spec:
        with open(args.spec) as f:
            params = json.load(f)
    family = args.family
    S = int(float(params.get("S", args.scale)))
    if family == "mixture":
        lambdas = params.get("lambdas") or (args.lambdas and _floats(args.lambdas))
        weights = params.get("weights") or (args.weights and _floats(args.weights))
        if not lambdas or not weights:
            raise CliError("mixture needs --lambdas and --weights (or a --spec file)")
        return MixtureSpec(tuple(lambdas), tuple(weights), S)
    if family in ("two-comp", "three-comp"):
        return mixture_spec(family, int(params.get("case", args.case)), S)
    if family == "power-law":
        return PowerLawSpec(S, float(params.get("alpha", args.alpha)), float(params.get("total", args.total or S)))
    if family == "scrna":
        fields = {k: (tuple(map(tuple, v)) if k == "beta_params" else tuple(v) if isinstance(v, list) else v)
                  for k, v in params.items()}
        fields.setdefault("n_cells", args.cells)
        fields.setdefault("n_genes", args.genes)
        return ScrnaSpec(**fields)
    raise CliError(f"unknown family {family!r}")


def cmd_simulate(args, out, err) -> int:
    seed = _seed(args, err)
    spec = _sim_spec(args)
    rng = make_rng(seed)
    prefix = args.out
    if isinstance(spec, ScrnaSpec):
        if not prefix:
            raise CliError("scrna simulation needs --out PREFIX")
        sm = sample_scrna(spec, rng)
        cells, genes, vals = sm.triplets()
        with open(f"{prefix}.triplets.tsv", "w") as f:
            f.write("cell\tgene\tcount\n")
            f.writelines(f"{c}\t{g}\t{v}\n" for c, g, v in zip(cells, genes, vals))
        with open(f"{prefix}.cells.tsv", "w") as f:
            f.write("cell\tsubpop\tbatch\ttheta\ttrue_dropout\tobserved_dropout\n")
            for i in range(spec.n_cells):
                f.write(
                    f"{i}\t{sm.subpop[i]}\t{sm.batch[i]}\t{_fmt(float(sm.theta[i]))}\t"
                    f"{_fmt(float(sm.true_dropout[i]))}\t{_fmt(float(sm.observed_dropout[i]))}\n"
                )
        write_report({"cells": spec.n_cells, "genes": spec.n_genes, "nonzero": int(len(vals)), "seed": seed},
                     args.format, out)
        return 0

    sample = sample_mixture(spec, rng) if isinstance(spec, MixtureSpec) else sample_power_law(spec, rng)
    truth = {"S": sample.S, "n0": sample.n0, "D": sample.histogram.D, "N": sample.histogram.N, "seed": seed}
    if prefix:
        Path(f"{prefix}.hist.txt").write_text(sample.histogram.render())
        with open(f"{prefix}.truth.tsv", "w") as f:
            write_report(truth, "tsv", f)
        write_report(truth, args.format, out)
    else:
        out.write("".join(f"# {k}\t{v}\n" for k, v in truth.items()))
        out.write(sample.histogram.render())
    return 0


def cmd_bench(args, out, err) -> int:
    seed = _seed(args, err)
    scale = int(float(args.scale))
    scrna = ScrnaSpec(n_cells=args.cells, n_genes=args.genes) if args.family == "scrna" else None
    rows: list[dict] = []
    stream = run_bench(
        args.family, args.reps, seed, case=args.case, scale=scale, alpha=args.alpha,
        boot=args.boot, max_order=args.max_order, floor=args.floor, threads=args.threads, scrna=scrna,
    )
    header_written = False
    try:
        for row in stream:
            rows.append(row)
            if args.format == "tsv":
                if not header_written:
                    out.write("\t".join(row) + "\n")
                    header_written = True
                out.write("\t".join(_fmt(v) for v in row.values()) + "\n")
                out.flush()
    except Exception as exc:
        if args.format == "json":
            write_report({"family": args.family, "seed": seed, "rows": rows, "error": str(exc)}, "json", out)
        raise CliError(f"bench aborted after {len(rows)} replicates: {exc}") from exc

    summary = summarize(rows, args.family)
    if args.format == "json":
        write_report({"family": args.family, "seed": seed, "rows": rows, "summary": summary}, "json", out)
    else:
        out.write("\n")
        if summary:
            out.write("\t".join(summary[0]) + "\n")
            for s in summary:
                out.write("\t".join(_fmt(v) for v in s.values()) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unseen", description="Estimate the number of unobserved classes.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-order", type=int, default=MAX_ORDER_CAP, help="largest quadrature order to try")
    common.add_argument("--floor", type=float, default=DEFAULT_FLOOR, help="smallest admissible quadrature point")
    common.add_argument("--format", choices=("tsv", "json"), default="tsv")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=1)

    def add_input(p):
        p.add_argument("--hist", help="two-column 'j n_j' histogram file")
        p.add_argument("--counts", help="one count per class per line")

    p = sub.add_parser("estimate", parents=[common], help="point estimate")
    add_input(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bootstrap", parents=[common], help="bagged estimate with variance and interval")
    add_input(p)
    p.add_argument("--reps", type=int, default=1000)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("simulate", parents=[common], help="draw a synthetic sample with ground truth")
    p.add_argument("family", choices=("mixture", "two-comp", "three-comp", "power-law", "scrna"))
    p.add_argument("--spec", help="JSON file with spec parameters")
    p.add_argument("--case", type=int, default=1)
    p.add_argument("--scale", default="1e4", help="population size S")
    p.add_argument("--lambdas")
    p.add_argument("--weights")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--total", type=float, default=None)
    p.add_argument("--cells", type=int, default=200)
    p.add_argument("--genes", type=int, default=2000)
    p.add_argument("--out", help="output prefix")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", parents=[common], help="replicated experiment against truth")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--case", type=int, default=1)
    p.add_argument("--scale", default="1e4", help="population size S")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--boot", type=int, default=0, help="bootstrap replicates per run (0 = no bagging)")
    p.add_argument("--cells", type=int, default=200)
    p.add_argument("--genes", type=int, default=2000)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[list[str]] = None, out: TextIO = None, err: TextIO = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if getattr(args, "max_order", 1) < 1:
        err.write("error: --max-order must be >= 1\n")
        return 2
    try:
        return args.func(args, out, err)
    except CliError as exc:
        err.write(f"error: {exc}\n")
        return 1
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        err.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
