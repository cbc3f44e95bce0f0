"""Monte Carlo harness: single-run p-value tables, replicated size/power
studies and CLT diagnostics.

Seeds are derived per cell from the content of the cell (family, a, law), not
from its position in the grid, so adding a model or a test never changes the
draws of the other cells.  Within a cell every test sees the same simulated
series (common random numbers).
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Sequence

import numpy as np

from .estimators import Basis, TestFunctionSet, build_stack
from .exceptions import IIDTestError, ParameterError
from .iidtests import (
    ALL_VARIANTS,
    PLAIN_T,
    LJUNG_L,
    WHITENED_L,
    WHITENED_T,
    TestResult,
    TestVariant,
    classic_box_pierce,
    classic_ljung_box,
    ljung_box_abs,
    run_tests,
    statistic_from_stack,
)
from .rand_models import (
    Family,
    InnovationLaw,
    ModelSpec,
    SeedSpec,
    derive_seed,
    draw_innovations,
    simulate,
)

DEFAULT_SEED = 1
SEED_ENV_VAR = "IIDTEST_SEED"
TABLE_A_VALUES = (0.1, 0.2, 0.3, 0.4, 0.5)
TABLE_FAMILIES = (Family.AR1, Family.MA1, Family.SV, Family.GARCH11)
TABLE_LAWS = ("gaussian", "laplace")
# column letters: Ljung-Box on x, Ljung-Box on |x|, combined test
TABLE_TESTS = ("ljung-box", "ljung-box-abs", "new")
TABLE_LETTERS = {"ljung-box": "O", "ljung-box-abs": "A", "new": "N"}
LAW_LETTERS = {"gaussian": "G", "laplace": "L", "laplace-literal": "L*"}

CSV_HEADER = ("family", "a", "law", "test", "alpha", "metric", "value", "stderr", "R", "N", "K", "seed")

_ID_ABS = TestFunctionSet.id_abs()
_COV = Basis.COVARIANCE

# statistics on the (x, |x|) family, evaluated together from shared stacks
_ID_ABS_TESTS: dict[str, TestVariant] = {
    "plain-t": PLAIN_T,
    "ljung-l": LJUNG_L,
    "whitened-t": WHITENED_T,
    "whitened-l": WHITENED_L,
    "new": WHITENED_L,
    "whitened-t-cov": TestVariant(WHITENED_T.kind, basis=_COV),
    "whitened-l-cov": TestVariant(WHITENED_L.kind, basis=_COV),
}
_CLASSIC_TESTS: dict[str, Callable[..., TestResult]] = {
    "ljung-box": classic_ljung_box,
    "ljung-box-abs": ljung_box_abs,
    "box-pierce": classic_box_pierce,
}
TEST_NAMES = tuple(_CLASSIC_TESTS) + tuple(_ID_ABS_TESTS)


def default_seed() -> int:
    """Seed from ``IIDTEST_SEED`` if set, else ``DEFAULT_SEED``."""
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"{SEED_ENV_VAR}={raw!r} is not an integer") from None


def evaluate_tests(x, names: Sequence[str], K: int) -> list[TestResult | Exception]:
    """Apply the named tests to one series.

    Failures (degenerate columns, singular whitening matrices) are returned in
    place of the result instead of being raised.
    """
    out: list = [None] * len(names)
    for i, name in enumerate(names):
        if name in _CLASSIC_TESTS:
            try:
                out[i] = _CLASSIC_TESTS[name](x, K)
            except IIDTestError as exc:
                out[i] = exc
        elif name not in _ID_ABS_TESTS:
            raise ParameterError(f"unknown test {name!r}; choose from {list(TEST_NAMES)}")
    stacks = {}
    for i, name in enumerate(names):
        if name not in _ID_ABS_TESTS:
            continue
        variant = _ID_ABS_TESTS[name]
        if variant.basis not in stacks:
            try:
                stacks[variant.basis] = build_stack(x, _ID_ABS, K, variant.basis)
            except IIDTestError as exc:
                stacks[variant.basis] = exc
        stack = stacks[variant.basis]
        if isinstance(stack, Exception):
            out[i] = stack
            continue
        try:
            out[i] = statistic_from_stack(stack, variant)
        except IIDTestError as exc:
            out[i] = exc
    return out


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class ExperimentConfig:
    families: tuple[Family, ...] = TABLE_FAMILIES
    a_values: tuple[float, ...] = TABLE_A_VALUES
    laws: tuple[str, ...] = TABLE_LAWS
    N: int = 100
    K: int = 5
    tests: tuple[str, ...] = TABLE_TESTS
    replications: int = 1
    alphas: tuple[float, ...] = (0.05,)
    seed: int = DEFAULT_SEED
    burn_in: int = 0
    output: str | None = None

    def __post_init__(self):
        errors = _validate(self)
        if errors:
            raise ConfigError(errors)
        object.__setattr__(self, "families", tuple(Family(f) for f in self.families))
        for name in ("a_values", "alphas"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "laws", tuple(self.laws))
        object.__setattr__(self, "tests", tuple(self.tests))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError(["<root>: expected a JSON object"])
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError([f"{k}: unknown field" for k in unknown])
        return cls(**data)

    @classmethod
    def paper_tables(cls, seed: int = DEFAULT_SEED, **overrides) -> "ExperimentConfig":
        return cls(seed=seed, **overrides)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["families"] = [f.value for f in self.families]
        for key in ("a_values", "laws", "tests", "alphas"):
            d[key] = list(d[key])
        return d

    def cells(self) -> list[tuple[Family, float, str]]:
        out = []
        for fam in self.families:
            a_grid = (0.0,) if fam is Family.IID else self.a_values
            for a in a_grid:
                for law in self.laws:
                    out.append((fam, a, law))
        return out

    def cell_seed(self, family: Family, a: float, law: str) -> int:
        return derive_seed(
            self.seed,
            list(Family).index(family),
            int(round(a * 1_000_000)),
            list(LAW_LETTERS).index(law),
        )

    def model(self, family: Family, a: float, law: str) -> ModelSpec:
        return ModelSpec(
            family=family,
            a=None if family is Family.IID else a,
            innovation=InnovationLaw.from_label(law),
            length=self.N,
            burn_in=self.burn_in,
        )


class ConfigError(ParameterError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid experiment config: " + "; ".join(self.errors))


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) and math.isfinite(v)


def _validate(cfg: ExperimentConfig) -> list[str]:
    errs = []

    def seq(name):
        val = getattr(cfg, name)
        if isinstance(val, (str, bytes)) or not isinstance(val, Sequence):
            errs.append(f"{name}: expected a list")
            return []
        return val

    families = seq("families")
    valid_fams = [f.value for f in Family]
    for i, f in enumerate(families):
        if f not in valid_fams and not isinstance(f, Family):
            errs.append(f"families[{i}]: {f!r} not one of {valid_fams}")
    for i, a in enumerate(seq("a_values")):
        if not _is_real(a) or not 0.0 < a < 1.0:
            errs.append(f"a_values[{i}]: {a!r} must lie in (0, 1)")
    for i, law in enumerate(seq("laws")):
        if law not in LAW_LETTERS:
            errs.append(f"laws[{i}]: {law!r} not one of {list(LAW_LETTERS)}")
    tests = seq("tests")
    if not tests:
        errs.append("tests: at least one test is required")
    for i, t in enumerate(tests):
        if t not in TEST_NAMES:
            errs.append(f"tests[{i}]: {t!r} not one of {list(TEST_NAMES)}")
    for i, al in enumerate(seq("alphas")):
        if not _is_real(al) or not 0.0 < al < 1.0:
            errs.append(f"alphas[{i}]: {al!r} must lie in (0, 1)")
    if not _is_int(cfg.N) or cfg.N < 3:
        errs.append(f"N: {cfg.N!r} must be an integer >= 3")
    if not _is_int(cfg.K) or cfg.K < 1:
        errs.append(f"K: {cfg.K!r} must be a positive integer")
    elif _is_int(cfg.N) and cfg.K >= cfg.N - 1:
        errs.append(f"K: {cfg.K} must be below N - 1 = {cfg.N - 1}")
    if not _is_int(cfg.replications) or cfg.replications < 1:
        errs.append(f"replications: {cfg.replications!r} must be an integer >= 1")
    if not _is_int(cfg.seed) or not 0 <= cfg.seed < 2**64:
        errs.append(f"seed: {cfg.seed!r} must be a 64-bit unsigned integer")
    if not _is_int(cfg.burn_in) or cfg.burn_in < 0:
        errs.append(f"burn_in: {cfg.burn_in!r} must be a non-negative integer")
    if cfg.output is not None and not isinstance(cfg.output, str):
        errs.append("output: expected a string path")
    return errs


# ---------------------------------------------------------------- reports


@dataclass
class CellRecord:
    family: str
    a: float
    law: str
    test: str
    alpha: float | None
    metric: str
    value: float | None
    stderr: float | None
    R: int
    N: int
    K: int
    seed: int
    failures: int = 0
    statistic_mean: float | None = None
    statistic_sd: float | None = None
    error: str | None = None

    def csv_row(self) -> list[str]:
        return [_fmt(getattr(self, col)) for col in CSV_HEADER]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    seed: int
    records: list[CellRecord] = field(default_factory=list)
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "config": self.config,
            "records": [asdict(r) for r in self.records],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(
            kind=d["kind"],
            config=d["config"],
            seed=d["seed"],
            records=[CellRecord(**r) for r in d["records"]],
            timestamp=d["timestamp"],
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in self.records:
            writer.writerow(rec.csv_row())
        return buf.getvalue()


def write_report(report: ExperimentReport, path, fmt: str = "csv") -> None:
    """Write ``report`` as CSV (one row per cell) or JSON (full nested report)."""
    fmt = fmt.lower()
    if fmt == "csv":
        text = report.to_csv()
    elif fmt == "json":
        text = json.dumps(report.to_dict(), indent=2, allow_nan=True) + "\n"
    else:
        raise ParameterError(f"unknown report format {fmt!r}; use 'csv' or 'json'")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def read_report(path) -> ExperimentReport:
    with open(path) as fh:
        return ExperimentReport.from_dict(json.load(fh))


# ---------------------------------------------------------------- runs


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _single_cell(cfg: ExperimentConfig, cell) -> list[CellRecord]:
    family, a, law = cell
    seed = cfg.cell_seed(family, a, law)
    base = dict(family=family.value, a=a, law=law, alpha=None, metric="p_value", stderr=None, R=1, N=cfg.N, K=cfg.K, seed=seed)
    try:
        x = simulate(cfg.model(family, a, law), SeedSpec(seed, 0))
        results = evaluate_tests(x, cfg.tests, cfg.K)
    except IIDTestError as exc:
        results = [exc] * len(cfg.tests)
    out = []
    for name, res in zip(cfg.tests, results):
        if isinstance(res, Exception):
            out.append(CellRecord(test=name, value=None, failures=1, error=str(res), **base))
        else:
            out.append(CellRecord(test=name, value=res.p_value, statistic_mean=res.statistic, **base))
    return out


def single_run_table(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """One simulated series per (family, a, law) cell and one p-value per test."""
    rows = _map(lambda c: _single_cell(cfg, c), cfg.cells(), workers)
    report = ExperimentReport("single", cfg.to_dict(), cfg.seed)
    for chunk in rows:
        report.records.extend(chunk)
    return report


def replicate_pvalues(model: ModelSpec, tests: Sequence[str], R: int, seed: int, K: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """``(p_values, statistics)``, each of shape (R, len(tests)); NaN marks a failed replication."""
    pv = np.full((R, len(tests)), np.nan)
    st = np.full((R, len(tests)), np.nan)
    for r in range(R):
        try:
            x = simulate(model, SeedSpec(seed, r))
        except IIDTestError:
            continue
        for j, res in enumerate(evaluate_tests(x, tests, K)):
            if not isinstance(res, Exception):
                pv[r, j] = res.p_value
                st[r, j] = res.statistic
    return pv, st


@dataclass(frozen=True)
class RateEstimate:
    rate: float
    stderr: float
    R: int
    failures: int = 0


def _rate(pvals: np.ndarray, alpha: float) -> RateEstimate:
    ok = pvals[~np.isnan(pvals)]
    fails = pvals.size - ok.size
    if ok.size == 0:
        return RateEstimate(math.nan, math.nan, pvals.size, fails)
    r = float(np.mean(ok < alpha))
    return RateEstimate(r, math.sqrt(r * (1 - r) / ok.size), pvals.size, fails)


def rejection_rate(model: ModelSpec, test: str, alpha: float, R: int, seed: int, K: int = 5) -> RateEstimate:
    """Fraction of R seeded replications whose p-value is below ``alpha``."""
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    pv, _ = replicate_pvalues(model, [test], R, seed, K)
    return _rate(pv[:, 0], alpha)


def _replicated_cell(cfg: ExperimentConfig, cell) -> list[CellRecord]:
    family, a, law = cell
    seed = cfg.cell_seed(family, a, law)
    R = cfg.replications
    pv, st = replicate_pvalues(cfg.model(family, a, law), cfg.tests, R, seed, cfg.K)
    out = []
    for j, name in enumerate(cfg.tests):
        stats_ok = st[:, j][~np.isnan(st[:, j])]
        for alpha in cfg.alphas:
            est = _rate(pv[:, j], alpha)
            out.append(
                CellRecord(
                    family=family.value, a=a, law=law, test=name, alpha=alpha,
                    metric="rejection_rate", value=est.rate, stderr=est.stderr,
                    R=R, N=cfg.N, K=cfg.K, seed=seed, failures=est.failures,
                    statistic_mean=float(stats_ok.mean()) if stats_ok.size else None,
                    statistic_sd=float(stats_ok.std(ddof=1)) if stats_ok.size > 1 else None,
                )
            )
    return out


def replicated_study(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Rejection rates with binomial standard errors for every cell, test and alpha."""
    rows = _map(lambda c: _replicated_cell(cfg, c), cfg.cells(), workers)
    report = ExperimentReport("replicated", cfg.to_dict(), cfg.seed)
    for chunk in rows:
        report.records.extend(chunk)
    return report


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    if cfg.replications > 1:
        return replicated_study(cfg, workers)
    return single_run_table(cfg, workers)


def paper_table_arrays(report: ExperimentReport) -> dict[str, tuple[list[float], list[str], np.ndarray]]:
    """Rearrange single-run p-values into one (a x test/law) table per family.

    Columns follow the order O, A, N for the first law, then for the second.
    """
    if report.kind != "single":
        raise ParameterError("p-value tables need a single-run report")
    cfg = report.config
    out = {}
    cols = [(t, law) for law in cfg["laws"] for t in cfg["tests"]]
    labels = [f"p_{TABLE_LETTERS.get(t, t)},{LAW_LETTERS.get(law, law)}" for t, law in cols]
    for fam in cfg["families"]:
        recs = [r for r in report.records if r.family == fam]
        a_vals = sorted({r.a for r in recs})
        table = np.full((len(a_vals), len(cols)), np.nan)
        for r in recs:
            table[a_vals.index(r.a), cols.index((r.test, r.law))] = np.nan if r.value is None else r.value
        out[fam] = (a_vals, labels, table)
    return out


_FAMILY_TITLES = {
    "ar1": "Autoregression X_t = a X_{t-1} + Z_t",
    "ma1": "Moving average X_t = Z_t + a Z_{t-1}",
    "sv": "Stochastic volatility X_t = exp(V_t) Z_t, V_t = a V_{t-1} + W_t",
    "garch": "GARCH(1,1) V_t^2 = (1 + V_{t-1}^2 + X_{t-1}^2) a/3",
    "iid": "i.i.d. innovations",
}


def format_paper_tables(report: ExperimentReport) -> str:
    blocks = []
    for fam, (a_vals, labels, table) in paper_table_arrays(report).items():
        lines = [_FAMILY_TITLES.get(fam, fam), "  a   " + " ".join(f"{lab:>8}" for lab in labels)]
        for a, row in zip(a_vals, table):
            cells = " ".join(f"{v:8.3f}" if not math.isnan(v) else f"{'--':>8}" for v in row)
            lines.append(f"{a:4.2f} {cells}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def format_rate_table(report: ExperimentReport) -> str:
    lines = [f"{'family':8} {'a':>5} {'law':>9} {'test':>14} {'alpha':>6} {'rate':>7} {'stderr':>7}"]
    for r in report.records:
        val = "--" if r.value is None or math.isnan(r.value) else f"{r.value:.3f}"
        se = "--" if r.stderr is None or math.isnan(r.stderr) else f"{r.stderr:.3f}"
        lines.append(f"{r.family:8} {r.a:5.2f} {r.law:>9} {r.test:>14} {r.alpha:6.3f} {val:>7} {se:>7}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- null-law studies


def null_statistics(
    law: InnovationLaw,
    funcs: TestFunctionSet,
    N: int,
    K: int,
    R: int,
    seed: int,
    variants: Sequence[TestVariant] = ALL_VARIANTS,
) -> tuple[np.ndarray, np.ndarray]:
    """Statistics and p-values, shape (R, len(variants)), under an i.i.d. null."""
    stats_ = np.empty((R, len(variants)))
    pvals = np.empty((R, len(variants)))
    for r in range(R):
        x = draw_innovations(SeedSpec(seed, r), law, N)
        for j, res in enumerate(run_tests(x, funcs, K, variants)):
            stats_[r, j] = res.statistic
            pvals[r, j] = res.p_value
    return stats_, pvals


@dataclass
class CltDiagnostic:
    """Empirical versus limiting covariance of sqrt(N)-scaled lag vectors.

    ``empirical_cov[k]`` is the m^2 x m^2 covariance across replications of
    sqrt(N) * gamma-vector at lag k+1; ``theory_cov`` is Q (x) Q with Q the
    covariance of the transformed columns.  The ``corr`` fields repeat this for
    correlation vectors against C (x) C.  ``cross_lag_cov`` holds the
    covariance between lag 1 and lag 2 blocks (limit 0).
    """

    N: int
    R: int
    K: int
    m: int
    law: str
    empirical_cov: np.ndarray
    theory_cov: np.ndarray
    empirical_corr_cov: np.ndarray
    theory_corr_cov: np.ndarray
    cross_lag_cov: np.ndarray
    max_cov_discrepancy: float
    max_corr_discrepancy: float
    max_cross_lag_cov: float

    def to_dict(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in asdict(self).items()}


def clt_diagnostic(
    funcs: TestFunctionSet,
    law: InnovationLaw,
    N: int,
    R: int,
    K: int = 2,
    seed: int = DEFAULT_SEED,
    reference_size: int = 1_000_000,
) -> CltDiagnostic:
    if K < 1:
        raise ParameterError("K must be >= 1")
    m = funcs.m
    cov_samples = np.empty((R, K, m * m))
    corr_samples = np.empty((R, K, m * m))
    root_n = math.sqrt(N)
    for r in range(R):
        x = draw_innovations(SeedSpec(seed, r), law, N)
        cov_samples[r] = root_n * build_stack(x, funcs, K, Basis.COVARIANCE).lags
        corr_samples[r] = root_n * build_stack(x, funcs, K, Basis.CORRELATION).lags

    # population factors from one large independent sample
    ref = draw_innovations(SeedSpec(derive_seed(seed, 0xC17), 0), law, reference_size)
    cols = funcs.transform(ref)
    q = np.atleast_2d(np.cov(cols, rowvar=False, bias=True))
    sd = np.sqrt(np.diag(q))
    c = q / np.outer(sd, sd)
    theory_cov = np.kron(q, q)
    theory_corr = np.kron(c, c)

    emp_cov = np.stack([np.atleast_2d(np.cov(cov_samples[:, k, :], rowvar=False)) for k in range(K)])
    emp_corr = np.stack([np.atleast_2d(np.cov(corr_samples[:, k, :], rowvar=False)) for k in range(K)])

    cross = np.zeros((m * m, m * m))
    max_cross = 0.0
    for k1 in range(K):
        for k2 in range(k1 + 1, K):
            a = cov_samples[:, k1, :] - cov_samples[:, k1, :].mean(axis=0)
            b = cov_samples[:, k2, :] - cov_samples[:, k2, :].mean(axis=0)
            block = a.T @ b / (R - 1)
            if (k1, k2) == (0, 1):
                cross = block
            max_cross = max(max_cross, float(np.max(np.abs(block))))

    return CltDiagnostic(
        N=N,
        R=R,
        K=K,
        m=m,
        law=law.label,
        empirical_cov=emp_cov,
        theory_cov=theory_cov,
        empirical_corr_cov=emp_corr,
        theory_corr_cov=theory_corr,
        cross_lag_cov=cross,
        max_cov_discrepancy=float(np.max(np.abs(emp_cov - theory_cov))),
        max_corr_discrepancy=float(np.max(np.abs(emp_corr - theory_corr))),
        max_cross_lag_cov=max_cross,
    )
