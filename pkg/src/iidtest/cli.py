"""Command-line front end: ``iidtest test|simulate|experiment``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
failure (singular whitening matrix).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .estimators import FUNCTION_FAMILIES, Basis, TestFunctionSet, as_series
from .exceptions import (
    DataError,
    DegenerateSeriesError,
    IIDTestError,
    NotPositiveDefiniteError,
    ParameterError,
)
from .iidtests import DEFAULT_ALPHAS, TestKind, TestVariant, run_tests, symmetry_check
from .rand_models import Family, InnovationLaw, LawKind, ModelSpec, SeedSpec, simulate, write_series_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

VARIANT_ALIASES = {
    "plain-t": TestKind.PLAIN_T,
    "box-pierce": TestKind.PLAIN_T,
    "ljung-l": TestKind.LJUNG_L,
    "ljung": TestKind.LJUNG_L,
    "whitened-t": TestKind.WHITENED_T,
    "whitened-l": TestKind.WHITENED_L,
}

MODEL_ALIASES = {"ar1": Family.AR1, "ma1": Family.MA1, "sv": Family.SV, "garch": Family.GARCH11, "iid": Family.IID}

# JSON emitted by ``iidtest test --json``
TEST_OUTPUT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["input", "N", "alpha", "results", "warnings"],
    "properties": {
        "input": {"type": "string"},
        "N": {"type": "integer", "minimum": 2},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "warnings": {"type": "array", "items": {"type": "string"}},
        "results": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["variant", "functions", "m", "K", "N", "df", "statistic", "p_value", "reject_at", "reject"],
                "properties": {
                    "variant": {
                        "type": "object",
                        "required": ["kind", "c", "basis"],
                        "properties": {
                            "kind": {"enum": [k.value for k in TestKind]},
                            "c": {"type": "number", "exclusiveMinimum": 0},
                            "basis": {"enum": [b.value for b in Basis]},
                        },
                    },
                    "functions": {"type": "array", "items": {"type": "string"}},
                    "m": {"type": "integer", "minimum": 1},
                    "K": {"type": "integer", "minimum": 1},
                    "N": {"type": "integer", "minimum": 2},
                    "df": {"type": "integer", "minimum": 1},
                    "statistic": {"type": "number", "minimum": 0},
                    "p_value": {"type": "number", "minimum": 0, "maximum": 1},
                    "reject_at": {"type": "object", "additionalProperties": {"type": "boolean"}},
                    "reject": {"type": "boolean"},
                },
            },
        },
    },
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_float(text):
    try:
        val = float(text)
    except ValueError:
        return None
    return val


def read_series_csv(path) -> np.ndarray:
    """Read the first numeric column of a CSV file.

    A non-numeric first row is treated as a header; ``#`` lines and blank
    lines are skipped.  Any later row that does not parse is an error.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with fh:
        rows = [
            (lineno, row)
            for lineno, row in enumerate(csv.reader(fh), start=1)
            if row and any(c.strip() for c in row) and not row[0].lstrip().startswith("#")
        ]
    if not rows:
        raise DataError(f"{path}: no data rows")
    first_line, first = rows[0]
    parsed = [_parse_float(c) for c in first]
    data_rows = rows
    if any(v is None for v in parsed):
        data_rows = rows[1:]
        if not data_rows:
            raise DataError(f"{path}: header only, no data rows")
        parsed = [_parse_float(c) for c in data_rows[0][1]]
    col = next((i for i, v in enumerate(parsed) if v is not None), None)
    if col is None:
        raise DataError(f"{path}:{data_rows[0][0]}: no numeric column found")
    values = []
    for lineno, row in data_rows:
        val = _parse_float(row[col]) if col < len(row) else None
        if val is None or not np.isfinite(val):
            cell = row[col] if col < len(row) else ""
            raise DataError(f"{path}:{lineno}: non-numeric value {cell!r} in column {col + 1}")
        values.append(val)
    return np.asarray(values, dtype=float)


# ---------------------------------------------------------------- test


def cmd_test(args) -> int:
    x = read_series_csv(args.input)
    try:
        x = as_series(x)
    except ParameterError as exc:
        raise DataError(str(exc)) from exc
    if args.lags < 1 or x.size <= args.lags + 1:
        raise DataError(f"--lags {args.lags} too large for N={x.size}; need N > K + 1")
    funcs = TestFunctionSet.from_name(args.functions, args.trig_scale)
    names = args.variant or ["whitened-l"]
    variants = []
    for name in names:
        kind = VARIANT_ALIASES[name]
        basis = Basis(args.basis) if kind in (TestKind.WHITENED_T, TestKind.WHITENED_L) else Basis.CORRELATION
        variants.append(TestVariant(kind, c=args.c, basis=basis))

    warnings = []
    if args.functions == "id-abs":
        check = symmetry_check(x)
        if check.suspicious:
            warnings.append(check.message())
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)

    alphas = tuple(sorted(set(DEFAULT_ALPHAS) | {args.alpha}))
    results = run_tests(x, funcs, args.lags, variants, alphas)

    if args.json:
        payload = {
            "input": str(args.input),
            "N": int(x.size),
            "alpha": args.alpha,
            "warnings": warnings,
            "results": [dict(r.to_dict(), reject=r.reject(args.alpha)) for r in results],
        }
        print(json.dumps(payload, indent=2))
    else:
        print(f"N={x.size}  K={args.lags}  functions={','.join(funcs.names)}  alpha={args.alpha:g}")
        for name, r in zip(names, results):
            verdict = "reject" if r.reject(args.alpha) else "accept"
            print(f"{name:<11} statistic={r.statistic:.6g}  df={r.df}  p-value={r.p_value:.6g}  {verdict}")
    return EXIT_OK


# ---------------------------------------------------------------- simulate


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def cmd_simulate(args) -> int:
    family = MODEL_ALIASES[args.model]
    law = InnovationLaw(LawKind(args.innovations), standardized=not args.literal_laplace)
    if args.with_volatility and family not in (Family.SV, Family.GARCH11):
        raise ParameterError("--with-volatility only applies to sv and garch")
    if family is Family.GARCH11 and args.garch_coeffs is None and args.a is None:
        raise ParameterError("garch needs --a or --garch-coeffs")
    if family not in (Family.IID, Family.GARCH11) and args.a is None:
        raise ParameterError(f"{args.model} needs --a")
    spec = ModelSpec(
        family=family,
        a=args.a,
        innovation=law,
        length=args.n,
        garch_coeffs=tuple(args.garch_coeffs) if args.garch_coeffs else None,
        burn_in=args.burn_in,
    )
    seed = args.seed if args.seed is not None else experiments.default_seed()
    sim = simulate(spec, SeedSpec(seed, args.stream), return_volatility=args.with_volatility)
    x, v = sim if args.with_volatility else (sim, None)

    comments = [
        f"model={args.model} n={args.n} innovations={law.label} seed={seed} stream={args.stream} burn_in={args.burn_in}"
    ]
    if args.a is not None:
        comments.append(f"a={_fmt(args.a)}")
    if family is Family.GARCH11:
        comments.append("garch_coeffs=" + ",".join(_fmt(c) for c in spec.coefficients()))
    if v is not None:
        comments.append("v is the volatility multiplier: x = v * z")

    if args.output in (None, "-"):
        write_series_csv(sys.stdout, x, v, comments)
    else:
        try:
            write_series_csv(args.output, x, v, comments)
        except OSError as exc:
            raise DataError(f"cannot write {args.output}: {exc.strerror or exc}") from exc
    return EXIT_OK


# ---------------------------------------------------------------- experiment


def cmd_experiment(args) -> int:
    overrides = {}
    if args.paper_tables:
        cfg_dict = experiments.ExperimentConfig.paper_tables().to_dict()
        cfg_dict["output"] = None
    elif args.config:
        try:
            with open(args.config) as fh:
                cfg_dict = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: invalid JSON ({exc})") from exc
        if not isinstance(cfg_dict, dict):
            raise UsageError(f"{args.config}: <root>: expected a JSON object")
    else:
        raise UsageError("experiment needs --config FILE or --paper-tables")

    if args.seed is not None:
        overrides["seed"] = args.seed
    elif "seed" not in cfg_dict or args.paper_tables:
        overrides["seed"] = experiments.default_seed()
    if args.replications is not None:
        overrides["replications"] = args.replications
    cfg = experiments.ExperimentConfig.from_dict({**cfg_dict, **overrides})

    report = experiments.run_experiment(cfg, workers=args.workers)

    prefix = args.output or cfg.output or ("paper_tables" if args.paper_tables else "iidtest_report")
    prefix = Path(prefix)
    if prefix.suffix in (".csv", ".json"):
        prefix = prefix.with_suffix("")
    if prefix.parent and not prefix.parent.exists():
        prefix.parent.mkdir(parents=True, exist_ok=True)
    try:
        experiments.write_report(report, f"{prefix}.csv", "csv")
        experiments.write_report(report, f"{prefix}.json", "json")
    except OSError as exc:
        raise DataError(str(exc)) from exc

    if not args.quiet:
        if report.kind == "single":
            print(experiments.format_paper_tables(report), end="")
        else:
            print(experiments.format_rate_table(report), end="")
        print(f"wrote {prefix}.csv and {prefix}.json (seed {cfg.seed})")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iidtest", description="Portmanteau tests for the i.i.d. hypothesis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="test a series read from CSV")
    t.add_argument("--input", "-i", required=True, help="CSV file; the first numeric column is used")
    t.add_argument("--lags", "-k", type=int, default=5)
    t.add_argument("--functions", choices=FUNCTION_FAMILIES, default="id-abs")
    t.add_argument("--trig-scale", type=float, default=1.0, help="a in sin(a x), cos(a x)")
    t.add_argument("--variant", action="append", choices=sorted(VARIANT_ALIASES),
                   help="statistic to compute; repeatable (default whitened-l)")
    t.add_argument("--basis", choices=[b.value for b in Basis], default=Basis.CORRELATION.value,
                   help="basis for the whitened variants")
    t.add_argument("--c", type=float, default=2.0, help="constant in the L-form weights N(N+c)/(N-k)")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--json", action="store_true", help="machine-readable output")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="simulate one of the alternative models")
    s.add_argument("--model", choices=sorted(MODEL_ALIASES), required=True)
    s.add_argument("--a", type=float)
    s.add_argument("--garch-coeffs", type=float, nargs=3, metavar=("A0", "B", "C"))
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--innovations", choices=[k.value for k in LawKind], default="gaussian")
    s.add_argument("--literal-laplace", action="store_true", help="Laplace density 0.5 exp(-|z|) (variance 2)")
    s.add_argument("--seed", type=int, help=f"master seed (default ${experiments.SEED_ENV_VAR} or {experiments.DEFAULT_SEED})")
    s.add_argument("--stream", type=int, default=0)
    s.add_argument("--burn-in", type=int, default=0)
    s.add_argument("--with-volatility", action="store_true")
    s.add_argument("--output", "-o", help="output CSV (default stdout)")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("experiment", help="run a Monte Carlo grid")
    e.add_argument("--config", help="JSON file with ExperimentConfig fields")
    e.add_argument("--paper-tables", action="store_true", help="four single-run p-value tables, N=100, K=5")
    e.add_argument("--seed", type=int)
    e.add_argument("--replications", type=int)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--output", "-o", help="output prefix; writes PREFIX.csv and PREFIX.json")
    e.add_argument("--quiet", action="store_true")
    e.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"iidtest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DegenerateSeriesError) as exc:
        print(f"iidtest: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NotPositiveDefiniteError as exc:
        print(f"iidtest: whitening failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParameterError, IIDTestError) as exc:
        print(f"iidtest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
