"""Command-line front end.

Every capability is exposed as a subcommand emitting machine-readable
JSON or CSV (``--format``), to stdout or ``--out``.  Exit codes: 0 on
success, 1 on any input/validation problem (single-line ``error: ...`` on
stderr), 2 on internal numeric failure.  All randomized commands are
seeded and produce byte-identical output for identical invocations.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import bounds_for_k, build_report
from .core import (
    DEFAULT_TOLERANCE,
    SystemShape,
    entropy,
    make_distribution,
    read_weights,
    tail_probability,
)
from .errors import NumericFailureError, ValidationError
from .extrema import (
    max_entropy_distribution,
    min_entropy,
    piecewise_curve,
)
from .oracle import (
    oracle_min_entropy,
    oracle_transform_check,
    parse_sweep_config,
    records_to_csv,
    reference_sweep_config,
    run_sweep,
)
from .rng import derive_rng
from .scenarios import parse_scenario_config, run_scenario
from .transform import transform_repeated, transform_unique


class _UsageError(ValidationError):
    """Raised by the parser instead of argparse's SystemExit(2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="selbounds",
        description=(
            "Entropy-based performance bounds for resource-constrained "
            "selection systems"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="output encoding (default json)")
    common.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    common.add_argument("--seed", type=int, default=None, help="override the random seed")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads for sweep/scenario trials")
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE,
                        help="numeric tolerance for feasibility and bound checks")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "bounds", parents=[common],
        help="error/merit probability bounds at a given entropy",
        description=(
            "Closed-form lower/upper bounds on the optimal selection's error "
            "probability (with merit complements), plus tight bounds from "
            "numeric inversion of the exact extremal-entropy curves."
        ),
    )
    p.add_argument("--n", type=int, help="number of objects")
    p.add_argument("--m", type=int, required=True, help="number of selected objects")
    p.add_argument("--entropy", type=float, help="entropy in bits (incompatible with --dist)")
    p.add_argument("--dist", metavar="FILE", help="weights file; entropy is computed from it")
    p.add_argument("--k", type=int, default=1, help="performance requirement (needs --dist)")
    p.add_argument("--mode", choices=("unique", "repeated"),
                   help="composite mode for k > 1")
    p.add_argument("--compare-flawed", action="store_true",
                   help="also report the uncorrected lower-bound formula")
    p.add_argument("--tight-grid", type=int, default=4096,
                   help="grid size for the tight upper-bound inversion")

    p = sub.add_parser(
        "extrema", parents=[common],
        help="maximum- or minimum-entropy distribution for (n, m, pi)",
        description=(
            "Constructs the flat-segment maximum-entropy distribution or runs "
            "the discrete minimum-entropy candidate search."
        ),
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--pi", type=float, required=True, help="tail (error) mass")
    p.add_argument("--which", choices=("max", "min"), default="max")

    p = sub.add_parser(
        "curve", parents=[common],
        help="entropy-vs-p_hat curve with junction markers",
        description=(
            "Samples the piecewise-concave entropy curve over the feasible "
            "repeated-probability interval; junction rows mark the discrete "
            "minimization candidates."
        ),
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--pi", type=float, required=True)
    p.add_argument("--samples", type=int, default=200)

    p = sub.add_parser(
        "transform", parents=[common],
        help="composite system for a multi-object requirement",
        description=(
            "Rewrites the system over k-combinations (unique) or k-multisets "
            "(repeated) with exact composite probabilities."
        ),
    )
    p.add_argument("--dist", metavar="FILE", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=("unique", "repeated"), required=True)

    p = sub.add_parser(
        "sweep", parents=[common],
        help="Monte Carlo verification sweep of the bound sandwich",
        description=(
            "Samples random distributions per shape, evaluates all bounds at "
            "the observed entropy and reports violations (expected: none) "
            "plus bound-gap statistics split by the m >= n/2 regime."
        ),
    )
    p.add_argument("--config", metavar="FILE", help="sweep config file")
    p.add_argument("--paper-figs", action="store_true",
                   help="built-in preset: the eight published verification shapes, "
                        "100 scenarios each")
    p.add_argument("--scenarios", type=int, default=None,
                   help="override scenarios per shape")
    p.add_argument("--summary-out", metavar="PATH",
                   help="also write the summary JSON to PATH")

    p = sub.add_parser(
        "scenario", parents=[common],
        help="cache-prefetch or scheduling application report",
        description=(
            "Runs a configured application scenario: bound report, exact "
            "optimal rate and a seeded Monte Carlo estimate."
        ),
    )
    p.add_argument("--config", metavar="FILE", required=True)
    p.add_argument("--tight-grid", type=int, default=4096)

    p = sub.add_parser(
        "oracle-check", parents=[common],
        help="independent randomized/brute-force validators",
        description=(
            "Cross-checks the discrete minimum-entropy search against a "
            "randomized polytope descent, or the composite transforms "
            "against total enumeration."
        ),
    )
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--min-entropy", action="store_true")
    group.add_argument("--transform", action="store_true")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--pi", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--trials", type=int, default=20)

    return parser


def _require(args, names: list[str]) -> None:
    for name in names:
        if getattr(args, name.replace("-", "_"), None) is None:
            raise _UsageError(f"--{name} is required for this invocation")


def _cmd_bounds(args) -> tuple[str, str | None]:
    if args.dist is not None:
        if args.entropy is not None:
            raise _UsageError("--entropy conflicts with --dist (entropy is computed)")
        dist = make_distribution(read_weights(args.dist))
        if args.n is not None and args.n != dist.n:
            raise _UsageError(f"--n {args.n} does not match the {dist.n}-entry --dist file")
        if args.k > 1 or args.mode is not None:
            if args.mode is None:
                raise _UsageError("--mode is required when --k > 1")
            report = bounds_for_k(
                dist, args.m, args.k, args.mode,
                include_flawed=args.compare_flawed,
                tight_grid=args.tight_grid, tol=args.tolerance,
            )
        else:
            report = build_report(
                dist.n, args.m, entropy(dist), k=1, mode="direct",
                include_flawed=args.compare_flawed,
                tight_grid=args.tight_grid, tol=args.tolerance,
                pi_observed=tail_probability(dist, args.m),
            )
    else:
        if args.k != 1 or args.mode is not None:
            raise _UsageError("--k/--mode require --dist (a distribution to transform)")
        _require(args, ["n", "entropy"])
        report = build_report(
            args.n, args.m, args.entropy, k=1, mode="direct",
            include_flawed=args.compare_flawed,
            tight_grid=args.tight_grid, tol=args.tolerance,
        )
    if args.format == "json":
        return _json(report.to_dict()), None
    d = report.to_dict()
    cols = ["n", "m", "k", "mode", "entropy_bits"]
    vals = [str(d["n"]), str(d["m"]), str(d["k"]), d["mode"], _fmt(d["entropy_bits"])]
    for key, value in d["pi"].items():
        cols.append(f"pi_{key}")
        vals.append(_fmt(value))
    for key, value in d["psi"].items():
        cols.append(f"psi_{key}")
        vals.append(_fmt(value))
    if "pi_observed" in d:
        cols.append("pi_observed")
        vals.append(_fmt(d["pi_observed"]))
    cols.append("clamped")
    vals.append(";".join(d["clamped"]))
    return ",".join(cols) + "\n" + ",".join(vals) + "\n", None


def _cmd_extrema(args) -> tuple[str, str | None]:
    shape = SystemShape(args.n, args.m, args.pi)
    if args.which == "max":
        dist = max_entropy_distribution(shape)
        bits = entropy(dist)
        meta = {"which": "max", "n": shape.n, "m": shape.m, "pi": shape.pi,
                "entropy_bits": bits, "probs": [float(p) for p in dist.probs]}
    else:
        result = min_entropy(shape, args.tolerance)
        dist = result.argmin_distribution
        bits = result.min_entropy_bits
        meta = {
            "which": "min", "n": shape.n, "m": shape.m, "pi": shape.pi,
            "entropy_bits": bits,
            "probs": [float(p) for p in dist.probs],
            "index_bound": result.index_bound,
            "argmin_index": result.argmin_index,
            "candidates": [
                {"p_hat": c.p_hat, "entropy_bits": c.entropy_bits}
                for c in result.candidates
            ],
        }
    if args.format == "json":
        return _json(meta), None
    lines = [
        f"# which={args.which} n={shape.n} m={shape.m} pi={_fmt(shape.pi)} "
        f"entropy_bits={_fmt(bits)}"
    ]
    lines.extend(_fmt(p) for p in dist.probs)
    return "\n".join(lines) + "\n", None


def _cmd_curve(args) -> tuple[str, str | None]:
    shape = SystemShape(args.n, args.m, args.pi)
    samples = piecewise_curve(shape, args.samples, args.tolerance)
    if args.format == "json":
        return _json({
            "n": shape.n, "m": shape.m, "pi": shape.pi,
            "samples": [
                {"p_hat": s.p_hat, "entropy_bits": s.entropy_bits,
                 "segment_index": s.segment_index, "is_junction": s.is_junction}
                for s in samples
            ],
        }), None
    lines = ["p_hat,entropy_bits,segment_index,is_junction"]
    for s in samples:
        flag = "true" if s.is_junction else "false"
        lines.append(f"{_fmt(s.p_hat)},{_fmt(s.entropy_bits)},{s.segment_index},{flag}")
    return "\n".join(lines) + "\n", None


def _cmd_transform(args) -> tuple[str, str | None]:
    dist = make_distribution(read_weights(args.dist))
    if args.mode == "unique":
        ts = transform_unique(dist, args.m, args.k, args.tolerance)
    else:
        ts = transform_repeated(dist, args.m, args.k, args.tolerance)
    header = {
        "n_prime": ts.n_prime, "m_prime": ts.m_prime, "mode": ts.mode,
        "k": ts.k, "entropy_bits": entropy(ts.dist),
    }
    if args.format == "json":
        return _json({
            **header,
            "selection_mismatch": ts.selection_mismatch,
            "composites": [
                {"ids": [int(i) for i in ids], "probability": float(p),
                 "in_selected_set": bool(flag)}
                for ids, p, flag in zip(ts.composite_index, ts.dist.probs, ts.in_selected)
            ],
        }), None
    lines = ["# " + json.dumps(header), "composite_ids,probability,in_selected_set"]
    for ids, p, flag in zip(ts.composite_index, ts.dist.probs, ts.in_selected):
        tag = "true" if flag else "false"
        lines.append("+".join(str(int(i)) for i in ids) + f",{_fmt(p)},{tag}")
    return "\n".join(lines) + "\n", None


def _cmd_sweep(args) -> tuple[str, str | None]:
    if args.paper_figs == (args.config is not None):
        raise _UsageError("exactly one of --paper-figs / --config is required")
    if args.paper_figs:
        config = reference_sweep_config(
            seed=42 if args.seed is None else args.seed,
            scenarios=100 if args.scenarios is None else args.scenarios,
        )
    else:
        config = parse_sweep_config(Path(args.config).read_text(encoding="utf-8"))
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
        if args.scenarios is not None:
            config = dataclasses.replace(config, scenarios_per_shape=args.scenarios)
    records, summary = run_sweep(config, threads=max(1, args.threads), tol=args.tolerance)
    summary_text = json.dumps(summary) + "\n"
    if args.summary_out:
        Path(args.summary_out).write_text(summary_text, encoding="utf-8")
    if args.format == "json":
        payload = {
            "records": [
                {
                    "scenario_id": r.scenario_id, "n": r.n, "m": r.m,
                    "entropy_bits": r.entropy_bits, "pi_observed": r.pi_observed,
                    "pi_lb_analytic": r.pi_lb_analytic, "pi_ub_analytic": r.pi_ub_analytic,
                    "pi_lb_tight": r.pi_lb_tight, "pi_ub_tight": r.pi_ub_tight,
                    "violation": r.violation,
                }
                for r in records
            ],
            "summary": summary,
        }
        return _json(payload), None
    return records_to_csv(records), summary_text


def _cmd_scenario(args) -> tuple[str, str | None]:
    if args.format == "csv":
        raise _UsageError("scenario reports are JSON only; use --format json")
    path = Path(args.config)
    cfg = parse_scenario_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    report = run_scenario(cfg, tol=args.tolerance, tight_grid=args.tight_grid)
    return _json(report.to_dict()), None


def _cmd_oracle_check(args) -> tuple[str, str | None]:
    seed = 0 if args.seed is None else args.seed
    if args.min_entropy:
        _require(args, ["n", "m", "pi"])
        shape = SystemShape(args.n, args.m, args.pi)
        rng = derive_rng(seed, 1)
        found = oracle_min_entropy(shape, args.restarts, args.iters, rng)
        exact = min_entropy(shape, args.tolerance).min_entropy_bits
        return _json({
            "check": "min_entropy", "n": shape.n, "m": shape.m, "pi": shape.pi,
            "restarts": args.restarts, "iters": args.iters, "seed": seed,
            "oracle_entropy_bits": found,
            "exact_min_entropy_bits": exact,
            "oracle_minus_exact": found - exact,
        }), None
    _require(args, ["n", "k"])
    rng = derive_rng(seed, 2)
    report = oracle_transform_check(args.n, args.k, args.trials, rng)
    report = {"check": "transform", "seed": seed, **report}
    return _json(report), None


_COMMANDS = {
    "bounds": _cmd_bounds,
    "extrema": _cmd_extrema,
    "curve": _cmd_curve,
    "transform": _cmd_transform,
    "sweep": _cmd_sweep,
    "scenario": _cmd_scenario,
    "oracle-check": _cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        with np.errstate(over="raise", invalid="ignore", divide="ignore"):
            text, side_text = _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericFailureError, ArithmeticError, FloatingPointError) as exc:
        print(f"error: internal numeric failure: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.out)
    if side_text:
        sys.stderr.write(side_text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
