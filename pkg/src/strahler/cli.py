"""Command-line front end emitting stable CSV/JSON tables.

Subcommands: expect, ratio, dist, sample, enumerate, asympt, verify.
Exact values are emitted both as p/q and as a 12-significant-digit decimal
so downstream plotting never re-derives anything. Identical invocations
produce byte-identical output: fixed column order, fixed formatting, LF
line endings, and rows ordered by ascending magnitude then order.

Exit codes: 0 ok, 1 verification or evaluation failure, 2 usage/parse
error, 3 resource limit exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import Decimal, localcontext
from fractions import Fraction

from . import asymptotics as asym
from . import sampling, verification
from . import trees as trees_mod
from .expectations import (
    DEFAULT_EXACT_LIMIT,
    DegenerateRatioError,
    ExpectationEngine,
    LimitExceededError,
)
from .observables import ObservableSyntaxError, parse as parse_observable
from .trees import DEFAULT_ENUMERATION_LIMIT, EnumerationLimitError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3


def _decimal12(value) -> str:
    """12-significant-digit decimal rendering, exact Fractions included."""
    if isinstance(value, Fraction):
        with localcontext() as ctx:
            ctx.prec = 12
            return str(Decimal(value.numerator) / Decimal(value.denominator))
    return f"{float(value):.12g}"


def _emit(rows: list, headers: list, fmt: str, out_path):
    if fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=headers, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buffer.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


class _UsageError(Exception):
    pass


def _grid(args) -> list:
    if args.n_grid is not None:
        return args.n_grid
    if args.n is None:
        raise _UsageError("one of --n or --n-grid is required")
    return [args.n]


def _parse_grid(text: str) -> list:
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError("grid entries must be integers")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("grid entries must be positive")
    if any(a >= b for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError("grid must be strictly ascending")
    return values


def _engine(args) -> ExpectationEngine:
    exact_limit = args.max_n if args.max_n else DEFAULT_EXACT_LIMIT
    enum_limit = max(DEFAULT_ENUMERATION_LIMIT, args.max_n or 0)
    return ExpectationEngine(enumeration_limit=enum_limit, exact_limit=exact_limit)


def _observable(args):
    try:
        return parse_observable(args.f)
    except ObservableSyntaxError as err:
        raise _UsageError(f"bad observable: {err}") from None


def _mode_for(engine: ExpectationEngine, n: int, mode: str) -> str:
    if mode == "auto":
        return "exact" if n <= engine.exact_limit else "float"
    return mode


def cmd_expect(args) -> int:
    engine = _engine(args)
    f = _observable(args)
    rows = []
    for n in _grid(args):
        mode = _mode_for(engine, n, args.mode)
        if mode == "exact":
            value = engine.expectation_exact(n, args.r, f)
            exact_text = str(value)
        else:
            value = engine.expectation_float(n, args.r, f).value
            exact_text = ""
        rows.append(
            {
                "n": n,
                "r": args.r,
                "f": f.text,
                "value": exact_text,
                "value_decimal": _decimal12(value),
                "mode": mode,
            }
        )
    _emit(rows, ["n", "r", "f", "value", "value_decimal", "mode"], args.format, args.out)
    return EXIT_OK


def _ratio_init(engine, f, args):
    if f.arity == 1:
        return asym.laurent_at_infinity(f)
    fit_ns = [min(120, engine.exact_limit), min(200, engine.exact_limit),
              min(300, engine.exact_limit)]
    return asym.fit_initial_coeffs(engine, f, sorted(set(fit_ns)))


def cmd_ratio(args) -> int:
    engine = _engine(args)
    f = _observable(args)
    init = _ratio_init(engine, f, args)
    rows = []
    for n in _grid(args):
        mode = _mode_for(engine, n, args.mode)
        ratio = engine.bifurcation_ratio(n, args.r, f, mode=mode)
        expansion = asym.ratio_asymptotic(init, args.r, n)
        residual = float(ratio) - float(expansion.value)
        rows.append(
            {
                "n": n,
                "r": args.r,
                "f": f.text,
                "ratio": str(ratio) if mode == "exact" else "",
                "ratio_decimal": _decimal12(ratio),
                "asymptotic": str(expansion.value),
                "asymptotic_decimal": _decimal12(expansion.value),
                "limit": str(expansion.limit),
                "residual_decimal": f"{residual:.12g}",
                "mode": mode,
            }
        )
    _emit(
        rows,
        [
            "n",
            "r",
            "f",
            "ratio",
            "ratio_decimal",
            "asymptotic",
            "asymptotic_decimal",
            "limit",
            "residual_decimal",
            "mode",
        ],
        args.format,
        args.out,
    )
    return EXIT_OK


def cmd_dist(args) -> int:
    engine = _engine(args)
    rows = []
    for n in _grid(args):
        mode = _mode_for(engine, n, args.mode)
        table = engine.distribution(n, args.r, mode=mode)
        for s in sorted(table):
            prob = table[s]
            rows.append(
                {
                    "n": n,
                    "r": args.r,
                    "s": s,
                    "probability": str(prob) if mode == "exact" else "",
                    "probability_decimal": _decimal12(prob),
                    "mode": mode,
                }
            )
    _emit(
        rows,
        ["n", "r", "s", "probability", "probability_decimal", "mode"],
        args.format,
        args.out,
    )
    return EXIT_OK


def cmd_sample(args) -> int:
    engine = _engine(args)
    f = _observable(args)
    rows = []
    for n in _grid(args):
        cfg = sampling.SampleConfig(
            n=n, trials=args.trials, seed=args.seed, f=f, r=args.r
        )
        result = sampling.monte_carlo(cfg)
        mode = _mode_for(engine, n, args.mode)
        if mode == "exact":
            reference = engine.expectation_exact(n, args.r, f)
        else:
            reference = engine.expectation_float(n, args.r, f).value
        rows.append(
            {
                "n": n,
                "r": args.r,
                "f": f.text,
                "trials": result.trials,
                "seed": args.seed,
                "mean": f"{result.mean:.12g}",
                "stderr": "" if result.stderr is None else f"{result.stderr:.12g}",
                "reference": _decimal12(reference),
                "mode": mode,
            }
        )
    _emit(
        rows,
        ["n", "r", "f", "trials", "seed", "mean", "stderr", "reference", "mode"],
        args.format,
        args.out,
    )
    return EXIT_OK


def cmd_enumerate(args) -> int:
    engine = _engine(args)
    rows = []
    for n in _grid(args):
        for index, tree in enumerate(
            trees_mod.enumerate_trees(n, engine.enumeration_limit)
        ):
            profile = trees_mod.branch_counts(tree)
            rows.append(
                {
                    "n": n,
                    "index": index,
                    "tree": trees_mod.encode(tree),
                    "magnitude": profile.magnitude,
                    "order": profile.order,
                    "profile": " ".join(map(str, profile.counts)),
                }
            )
    _emit(
        rows,
        ["n", "index", "tree", "magnitude", "order", "profile"],
        args.format,
        args.out,
    )
    return EXIT_OK


def cmd_asympt(args) -> int:
    engine = _engine(args)
    f = _observable(args)
    init = _ratio_init(engine, f, args)
    coeffs = asym.coeff_recursion(init, args.r)
    residual_points = []
    rows = []
    for n in _grid(args):
        expansion = asym.expectation_asymptotic(init, args.r, n)
        row = {
            "n": n,
            "r": args.r,
            "f": f.text,
            "k": init.k,
            "a_r": str(coeffs.a_r),
            "b_r": str(coeffs.b_r),
            "asymptotic": str(expansion),
            "asymptotic_decimal": _decimal12(expansion),
            "exact": "",
            "exact_decimal": "",
            "residual_decimal": "",
        }
        if n <= engine.exact_limit:
            exact = engine.expectation_exact(n, args.r, f)
            residual = exact - expansion
            residual_points.append((n, residual))
            row["exact"] = str(exact)
            row["exact_decimal"] = _decimal12(exact)
            row["residual_decimal"] = _decimal12(residual)
        rows.append(row)
    slope = asym.log_slope(residual_points)
    slope_text = "" if slope is None else f"{slope:.6g}"
    for row in rows:
        row["fitted_slope"] = slope_text
    _emit(
        rows,
        [
            "n",
            "r",
            "f",
            "k",
            "a_r",
            "b_r",
            "asymptotic",
            "asymptotic_decimal",
            "exact",
            "exact_decimal",
            "residual_decimal",
            "fitted_slope",
        ],
        args.format,
        args.out,
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    engine = ExpectationEngine(
        enumeration_limit=max(DEFAULT_ENUMERATION_LIMIT, args.max_n or 0),
        exact_limit=max(1000, args.max_n or 0),
    )
    results = verification.run_all(
        engine=engine, max_n=args.max_n, trials=args.trials
    )
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status}  {result.name}: {result.detail}", file=sys.stderr)
    summary = {
        "passed": all(r.passed for r in results),
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "detail": r.detail,
                "seconds": round(r.seconds, 3),
            }
            for r in results
        ],
    }
    text = json.dumps(summary, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if summary["passed"] else EXIT_FAILURE


def _add_common(sub, with_f=True, with_sampling=False):
    sub.add_argument("--n", type=int, help="single magnitude")
    sub.add_argument(
        "--n-grid", type=_parse_grid, help="comma-separated ascending magnitudes"
    )
    sub.add_argument("--r", type=int, default=1, help="base branch order (default 1)")
    if with_f:
        sub.add_argument("--f", default="S1", help='observable, e.g. "S2/S1"')
    sub.add_argument(
        "--mode",
        choices=("exact", "float", "auto"),
        default="auto",
        help="arithmetic mode (auto: exact up to the ceiling, then float)",
    )
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", help="output path (default stdout)")
    sub.add_argument(
        "--max-n", type=int, help="raise/lower the exact and enumeration ceilings"
    )
    if with_sampling:
        sub.add_argument("--seed", type=int, default=42)
        sub.add_argument("--trials", type=int, default=10000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strahler",
        description="Branch-order statistics of the uniform random binary-tree model",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    expect = subparsers.add_parser("expect", help="expectation of an observable")
    _add_common(expect)
    expect.set_defaults(func=cmd_expect)

    ratio = subparsers.add_parser("ratio", help="bifurcation ratio vs its expansion")
    _add_common(ratio)
    ratio.set_defaults(func=cmd_ratio)

    dist = subparsers.add_parser("dist", help="distribution of a branch count")
    _add_common(dist, with_f=False)
    dist.set_defaults(func=cmd_dist)

    sample = subparsers.add_parser("sample", help="Monte Carlo estimate")
    _add_common(sample, with_sampling=True)
    sample.set_defaults(func=cmd_sample)

    enumerate_cmd = subparsers.add_parser(
        "enumerate", help="canonical enumeration of all shapes"
    )
    _add_common(enumerate_cmd, with_f=False)
    enumerate_cmd.set_defaults(func=cmd_enumerate)

    asympt = subparsers.add_parser("asympt", help="asymptotic expansion table")
    _add_common(asympt)
    asympt.set_defaults(func=cmd_asympt)

    verify = subparsers.add_parser("verify", help="run the acceptance checks")
    verify.add_argument("--max-n", type=int, help="clamp all magnitude grids")
    verify.add_argument(
        "--trials", type=int, default=verification.SAMPLER_TRIALS,
        help="sampler trials (default 100000)",
    )
    verify.add_argument("--out", help="JSON summary path (default stdout)")
    verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (LimitExceededError, EnumerationLimitError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_LIMIT
    except DegenerateRatioError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAILURE
    except sampling.ProfileEvaluationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
