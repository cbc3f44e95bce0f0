"""Portmanteau statistics for the i.i.d. null hypothesis.

Four statistics are built from the lag vectors of a ``LagCorrelationStack``:

* plain T:     N * sum_k ||C_k||^2
* plain L:     N (N + c) * sum_k ||C_k||^2 / (N - k)
* whitened T:  N * sum_k C_k' (C0 (x) C0)^{-1} C_k
* whitened L:  N (N + c) * sum_k C_k' (C0 (x) C0)^{-1} C_k / (N - k)

where C0 is the contemporaneous correlation (or covariance) matrix of the
transformed columns.  Each is compared against chi^2 with m^2 K degrees of
freedom.  With m = 1 and f(x) = x the plain forms are Box-Pierce and (c = 2)
Ljung-Box.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .estimators import (
    Basis,
    CorrelationMode,
    LagCorrelationStack,
    TestFunctionSet,
    as_series,
    build_stack,
    sample_skewness,
)
from .exceptions import ParameterError
from .matrixops import chi2_survival, kronecker, spd_inverse_sqrt

DEFAULT_ALPHAS = (0.01, 0.05, 0.10)


class TestKind(str, enum.Enum):
    __test__ = False

    PLAIN_T = "plain-t"
    LJUNG_L = "ljung-l"
    WHITENED_T = "whitened-t"
    WHITENED_L = "whitened-l"

    @property
    def whitened(self) -> bool:
        return self in (TestKind.WHITENED_T, TestKind.WHITENED_L)

    @property
    def ljung_weights(self) -> bool:
        return self in (TestKind.LJUNG_L, TestKind.WHITENED_L)


@dataclass(frozen=True)
class TestVariant:
    __test__ = False

    kind: TestKind = TestKind.WHITENED_L
    c: float = 2.0
    basis: Basis = Basis.CORRELATION

    def __post_init__(self):
        object.__setattr__(self, "kind", TestKind(self.kind))
        object.__setattr__(self, "basis", Basis(self.basis))
        if not self.c > 0:
            raise ParameterError(f"c must be positive, got {self.c}")
        if not self.kind.whitened and self.basis is not Basis.CORRELATION:
            raise ParameterError("plain statistics are defined in the correlation basis only")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "c": self.c, "basis": self.basis.value}


PLAIN_T = TestVariant(TestKind.PLAIN_T)
LJUNG_L = TestVariant(TestKind.LJUNG_L)
WHITENED_T = TestVariant(TestKind.WHITENED_T)
WHITENED_L = TestVariant(TestKind.WHITENED_L)
ALL_VARIANTS = (PLAIN_T, LJUNG_L, WHITENED_T, WHITENED_L)


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    statistic: float
    df: int
    p_value: float
    variant: TestVariant
    K: int
    m: int
    N: int
    functions: tuple[str, ...] = ()
    reject_at: dict = field(default_factory=dict)

    def reject(self, alpha: float) -> bool:
        return self.p_value < alpha

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.to_dict(),
            "functions": list(self.functions),
            "m": self.m,
            "K": self.K,
            "N": self.N,
            "df": self.df,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "reject_at": {f"{a:g}": r for a, r in self.reject_at.items()},
        }


def _result(statistic, stack: LagCorrelationStack, variant, alphas) -> TestResult:
    df = stack.m**2 * stack.K
    p = chi2_survival(statistic, df)
    return TestResult(
        statistic=float(statistic),
        df=df,
        p_value=p,
        variant=variant,
        K=stack.K,
        m=stack.m,
        N=stack.N,
        functions=stack.names,
        reject_at={float(a): p < a for a in alphas},
    )


def lag_weights(N: int, K: int, kind: TestKind, c: float = 2.0) -> np.ndarray:
    """Per-lag multipliers: N for T-forms, N (N + c)/(N - k) for L-forms."""
    k = np.arange(1, K + 1)
    if kind.ljung_weights:
        return N * (N + c) / (N - k)
    return np.full(K, float(N))


def whitening_matrix(contemporaneous) -> np.ndarray:
    """Phi (x) Phi with Phi the symmetric inverse square root of the m x m matrix."""
    phi = spd_inverse_sqrt(contemporaneous)
    return kronecker(phi, phi)


def statistic_from_stack(stack: LagCorrelationStack, variant: TestVariant = WHITENED_L, alphas=DEFAULT_ALPHAS) -> TestResult:
    """Evaluate one statistic on a precomputed stack.

    The stack basis must match ``variant.basis``.
    """
    if stack.basis is not variant.basis:
        raise ParameterError(f"stack is in {stack.basis.value} basis, variant needs {variant.basis.value}")
    weights = lag_weights(stack.N, stack.K, variant.kind, variant.c)
    vecs = stack.lags
    if variant.kind.whitened:
        vecs = vecs @ whitening_matrix(stack.contemporaneous).T
    norms = np.einsum("ij,ij->i", vecs, vecs)
    return _result(float(weights @ norms), stack, variant, alphas)


def _require_uncorrelated(funcs: TestFunctionSet):
    if funcs.correlation_mode is not CorrelationMode.ASSUMED_UNCORRELATED:
        raise ParameterError(
            "plain statistics need functions assumed uncorrelated under the null; "
            "use a whitened variant for a general function set"
        )


def _check_lags(x: np.ndarray, K: int):
    if K < 1 or x.size <= K + 1:
        raise ParameterError(f"need 1 <= K < N - 1, got K={K}, N={x.size}")


def statistic_plain_T(x, funcs: TestFunctionSet, K: int, alphas=DEFAULT_ALPHAS) -> TestResult:
    x = as_series(x)
    _check_lags(x, K)
    _require_uncorrelated(funcs)
    return statistic_from_stack(build_stack(x, funcs, K), PLAIN_T, alphas)


def statistic_ljung_L(x, funcs: TestFunctionSet, K: int, c: float = 2.0, alphas=DEFAULT_ALPHAS) -> TestResult:
    x = as_series(x)
    _check_lags(x, K)
    _require_uncorrelated(funcs)
    return statistic_from_stack(build_stack(x, funcs, K), TestVariant(TestKind.LJUNG_L, c), alphas)


def statistic_whitened(x, funcs: TestFunctionSet, K: int, variant: TestVariant = WHITENED_L, alphas=DEFAULT_ALPHAS) -> TestResult:
    """Whitened T or L statistic; raises ``NotPositiveDefiniteError`` on a singular C0."""
    if not variant.kind.whitened:
        raise ParameterError(f"{variant.kind.value} is not a whitened variant")
    x = as_series(x)
    _check_lags(x, K)
    return statistic_from_stack(build_stack(x, funcs, K, variant.basis), variant, alphas)


def run_test(x, funcs: TestFunctionSet, K: int, variant: TestVariant, alphas=DEFAULT_ALPHAS) -> TestResult:
    if variant.kind is TestKind.PLAIN_T:
        return statistic_plain_T(x, funcs, K, alphas)
    if variant.kind is TestKind.LJUNG_L:
        return statistic_ljung_L(x, funcs, K, variant.c, alphas)
    return statistic_whitened(x, funcs, K, variant, alphas)


def run_tests(x, funcs: TestFunctionSet, K: int, variants: Iterable[TestVariant], alphas=DEFAULT_ALPHAS) -> list[TestResult]:
    """Several variants on one series, building each basis' stack only once."""
    x = as_series(x)
    _check_lags(x, K)
    variants = list(variants)
    if any(not v.kind.whitened for v in variants):
        _require_uncorrelated(funcs)
    stacks = {}
    out = []
    for v in variants:
        if v.basis not in stacks:
            stacks[v.basis] = build_stack(x, funcs, K, v.basis)
        out.append(statistic_from_stack(stacks[v.basis], v, alphas))
    return out


def classic_box_pierce(x, K: int, alphas=DEFAULT_ALPHAS) -> TestResult:
    return statistic_plain_T(x, TestFunctionSet.identity(), K, alphas)


def classic_ljung_box(x, K: int, alphas=DEFAULT_ALPHAS) -> TestResult:
    return statistic_ljung_L(x, TestFunctionSet.identity(), K, 2.0, alphas)


def ljung_box_abs(x, K: int, alphas=DEFAULT_ALPHAS) -> TestResult:
    """Ljung-Box applied to |x|."""
    return statistic_ljung_L(x, TestFunctionSet.absolute(), K, 2.0, alphas)


def new_test(x, K: int, alphas=DEFAULT_ALPHAS) -> TestResult:
    """Default combined test: whitened L, c = 2, correlation basis, f = (x, |x|)."""
    return statistic_whitened(x, TestFunctionSet.id_abs(), K, WHITENED_L, alphas)


@dataclass(frozen=True)
class SymmetryCheck:
    skewness: float
    threshold: float

    @property
    def suspicious(self) -> bool:
        return abs(self.skewness) > self.threshold

    def message(self) -> str:
        return (
            f"sample skewness {self.skewness:.3f} exceeds {self.threshold:.3f}; "
            "(x, |x|) may be correlated for an asymmetric law, consider a whitened variant"
        )


def symmetry_check(x) -> SymmetryCheck:
    """Flag samples whose skewness exceeds 4 standard errors sqrt(6/N)."""
    x = as_series(x)
    return SymmetryCheck(sample_skewness(x), 4.0 * math.sqrt(6.0 / x.size))
