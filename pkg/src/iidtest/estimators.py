"""Empirical auto- and cross-correlations of transformed series.

A series ``x`` is pushed through functions f_1..f_m; each transformed column
is evaluated once and centred with its full-sample mean.  The lag-k
cross-covariance of columns i and j is

    gamma_k(f_i, f_j) = 1/(N-k) * sum_{t=1}^{N-k} (f_i(x_t) - m_i)(f_j(x_{t+k}) - m_j)

and the cross-correlation divides by the full-sample (1/N) standard
deviations s_i s_j.  At each lag the m x m matrix is flattened row-major, so
entry (i, j) sits at position ``m*i + j`` (0-based) of the lag vector.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import DegenerateSeriesError, DegenerateVarianceWarning, ParameterError


class Basis(str, enum.Enum):
    COVARIANCE = "covariance"
    CORRELATION = "correlation"


class CorrelationMode(str, enum.Enum):
    ASSUMED_UNCORRELATED = "assumed-uncorrelated"
    GENERAL = "general"


def as_series(x, min_length: int = 2) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ParameterError(f"series must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise ParameterError(f"series needs at least {min_length} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("series contains non-finite values")
    return arr


def _apply(f, x: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(x), dtype=float)
    except TypeError:
        out = None
    if out is None or out.shape != x.shape:
        # scalar-only callables
        out = np.array([f(float(v)) for v in x], dtype=float)
    return out


def _is_degenerate(col: np.ndarray, var: float) -> bool:
    scale = float(np.max(np.abs(col))) if col.size else 0.0
    return var <= (64 * np.finfo(float).eps * scale) ** 2


@dataclass(frozen=True)
class TestFunction:
    __test__ = False

    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)

    def __call__(self, x):
        return _apply(self.func, np.asarray(x, dtype=float))


@dataclass(frozen=True)
class TestFunctionSet:
    """Ordered family f_1..f_m of transformations.

    ``correlation_mode`` declares whether f_i(X), f_j(X) are assumed
    uncorrelated under the null (required by the plain statistics) or not.
    """

    __test__ = False

    functions: tuple[TestFunction, ...]
    correlation_mode: CorrelationMode = CorrelationMode.GENERAL
    trig_scale: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "correlation_mode", CorrelationMode(self.correlation_mode))
        if not self.functions:
            raise ParameterError("a test function set needs at least one function")
        names = [f.name for f in self.functions]
        if len(set(names)) != len(names):
            raise ParameterError(f"function names must be unique, got {names}")
        if self.trig_scale is not None and not self.trig_scale > 0:
            raise ParameterError(f"trig_scale must be positive, got {self.trig_scale}")

    @property
    def m(self) -> int:
        return len(self.functions)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.functions]

    def transform(self, x) -> np.ndarray:
        """N x m matrix of transformed columns."""
        x = np.asarray(x, dtype=float)
        return np.column_stack([f(x) for f in self.functions])

    @classmethod
    def identity(cls) -> "TestFunctionSet":
        return cls((TestFunction("x", _identity),), CorrelationMode.ASSUMED_UNCORRELATED)

    @classmethod
    def absolute(cls) -> "TestFunctionSet":
        return cls((TestFunction("|x|", np.abs),), CorrelationMode.ASSUMED_UNCORRELATED)

    @classmethod
    def id_abs(cls) -> "TestFunctionSet":
        # uncorrelated only for symmetric laws with finite fourth moment
        return cls(
            (TestFunction("x", _identity), TestFunction("|x|", np.abs)),
            CorrelationMode.ASSUMED_UNCORRELATED,
        )

    @classmethod
    def id_square(cls) -> "TestFunctionSet":
        return cls(
            (TestFunction("x", _identity), TestFunction("x^2", np.square)),
            CorrelationMode.GENERAL,
        )

    @classmethod
    def sin_cos(cls, a: float = 1.0) -> "TestFunctionSet":
        """Bounded odd/even pair sin(a x), cos(a x) for heavy-tailed data."""
        a = float(a)
        return cls(
            (
                TestFunction(f"sin({a:g}x)", lambda x: np.sin(a * x)),
                TestFunction(f"cos({a:g}x)", lambda x: np.cos(a * x)),
            ),
            CorrelationMode.ASSUMED_UNCORRELATED,
            trig_scale=a,
        )

    @classmethod
    def from_name(cls, name: str, trig_scale: float = 1.0) -> "TestFunctionSet":
        builders = {
            "id": cls.identity,
            "abs": cls.absolute,
            "id-abs": cls.id_abs,
            "id-sq": cls.id_square,
        }
        if name == "sin-cos":
            return cls.sin_cos(trig_scale)
        try:
            return builders[name]()
        except KeyError:
            raise ParameterError(
                f"unknown function family {name!r}; choose from {sorted([*builders, 'sin-cos'])}"
            ) from None


def _identity(x):
    return x


FUNCTION_FAMILIES = ("id", "abs", "id-abs", "id-sq", "sin-cos")


def transformed_mean(x, f) -> float:
    x = as_series(x, min_length=1)
    return float(np.mean(_apply(f, x)))


def transformed_variance(x, f) -> float:
    """Biased (1/N) variance of f(x).

    A constant column returns 0.0 and emits ``DegenerateVarianceWarning``.
    """
    x = as_series(x)
    col = _apply(f, x)
    var = float(np.mean((col - col.mean()) ** 2))
    if _is_degenerate(col, var):
        warnings.warn("transformed column is constant", DegenerateVarianceWarning, stacklevel=2)
        return 0.0
    return var


def _lagged_product(a: np.ndarray, b: np.ndarray, k: int) -> float:
    n = a.size
    return float(np.dot(a[: n - k], b[k:]) / (n - k))


def _check_lag(k: int, n: int):
    if not 0 <= k <= n - 2:
        raise ParameterError(f"lag {k} out of range [0, {n - 2}] for N={n}")


def cross_autocovariance(x, f, g, k: int) -> float:
    """gamma_k(f, g): covariance of f(x_t) and g(x_{t+k}) with full-sample means."""
    x = as_series(x)
    _check_lag(k, x.size)
    fc = _apply(f, x)
    gc = _apply(g, x)
    return _lagged_product(fc - fc.mean(), gc - gc.mean(), k)


def cross_autocorrelation(x, f, g, k: int) -> float:
    x = as_series(x)
    _check_lag(k, x.size)
    cols = []
    for name, fn in (("f", f), ("g", g)):
        col = _apply(fn, x)
        centred = col - col.mean()
        var = float(np.mean(centred**2))
        if _is_degenerate(col, var):
            raise DegenerateSeriesError(getattr(fn, "name", getattr(fn, "__name__", name)))
        cols.append((centred, np.sqrt(var)))
    (fc, sf), (gc, sg) = cols
    if k == 0 and f is g:
        return 1.0
    return _lagged_product(fc, gc, k) / (sf * sg)


@dataclass(frozen=True)
class LagCorrelationStack:
    """Lag vectors 1..K plus the contemporaneous m x m matrix.

    ``lags[k-1]`` is the length-m^2 vector for lag k, row-major in (i, j).
    """

    lags: np.ndarray
    contemporaneous: np.ndarray
    basis: Basis
    N: int
    means: np.ndarray
    stds: np.ndarray
    names: tuple[str, ...]

    @property
    def K(self) -> int:
        return self.lags.shape[0]

    @property
    def m(self) -> int:
        return self.contemporaneous.shape[0]

    def lag_vector(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.K:
            raise ParameterError(f"lag {k} out of range [1, {self.K}]")
        return self.lags[k - 1]

    def lag_matrix(self, k: int) -> np.ndarray:
        return self.lag_vector(k).reshape(self.m, self.m)

    def to_dict(self) -> dict:
        return {
            "basis": self.basis.value,
            "N": self.N,
            "K": self.K,
            "m": self.m,
            "names": list(self.names),
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "contemporaneous": self.contemporaneous.tolist(),
            "lags": self.lags.tolist(),
        }


def build_stack(x, funcs: TestFunctionSet, K: int, basis: Basis = Basis.CORRELATION) -> LagCorrelationStack:
    """Compute every lag-1..K cross-covariance/correlation vector of ``funcs(x)``.

    In the correlation basis a constant transformed column raises
    ``DegenerateSeriesError``; in the covariance basis it simply yields zeros.
    """
    basis = Basis(basis)
    x = as_series(x)
    n = x.size
    if not 1 <= K <= n - 2:
        raise ParameterError(f"K={K} must satisfy 1 <= K <= N-2 = {n - 2}")
    cols = funcs.transform(x)
    means = cols.mean(axis=0)
    centred = cols - means
    m = cols.shape[1]
    gamma0 = centred.T @ centred / n
    variances = np.diag(gamma0).copy()
    stds = np.sqrt(variances)

    lags = np.empty((K, m * m))
    for k in range(1, K + 1):
        lags[k - 1] = (centred[: n - k].T @ centred[k:] / (n - k)).ravel()

    if basis is Basis.CORRELATION:
        for i in range(m):
            if _is_degenerate(cols[:, i], variances[i]):
                raise DegenerateSeriesError(funcs.names[i])
        scale = np.outer(stds, stds)
        lags = lags / scale.ravel()
        contemporaneous = gamma0 / scale
        contemporaneous = (contemporaneous + contemporaneous.T) / 2
        np.fill_diagonal(contemporaneous, 1.0)
    else:
        contemporaneous = (gamma0 + gamma0.T) / 2

    for arr in (lags, contemporaneous, means, stds):
        arr.setflags(write=False)
    return LagCorrelationStack(
        lags=lags,
        contemporaneous=contemporaneous,
        basis=basis,
        N=n,
        means=means,
        stds=stds,
        names=tuple(funcs.names),
    )


def sample_cumulant4(w, x, y, z) -> float:
    """Fourth-order joint cumulant of four columns, from centred sample moments.

    E[W'X'Y'Z'] - E[W'X']E[Y'Z'] - E[W'Z']E[X'Y'] - E[W'Y']E[X'Z']
    """
    cols = [np.asarray(c, dtype=float) for c in (w, x, y, z)]
    n = cols[0].size
    if any(c.ndim != 1 or c.size != n for c in cols):
        raise ParameterError("cumulant needs four one-dimensional columns of equal length")
    if n < 2:
        raise ParameterError("cumulant needs at least two observations")
    w, x, y, z = (c - c.mean() for c in cols)
    return float(
        np.mean(w * x * y * z)
        - np.mean(w * x) * np.mean(y * z)
        - np.mean(w * z) * np.mean(x * y)
        - np.mean(w * y) * np.mean(x * z)
    )


def cumulant4_stderr(w, x, y, z, batches: int = 50) -> float:
    """Monte Carlo standard error of ``sample_cumulant4`` by batch means."""
    cols = [np.asarray(c, dtype=float) for c in (w, x, y, z)]
    n = cols[0].size
    if n < 2 * batches:
        raise ParameterError(f"need at least {2 * batches} observations for {batches} batches")
    edges = np.linspace(0, n, batches + 1).astype(int)
    vals = np.array(
        [sample_cumulant4(*(c[lo:hi] for c in cols)) for lo, hi in zip(edges[:-1], edges[1:])]
    )
    return float(vals.std(ddof=1) / np.sqrt(batches))


def sample_skewness(x) -> float:
    x = as_series(x)
    c = x - x.mean()
    m2 = np.mean(c**2)
    if m2 == 0:
        return 0.0
    return float(np.mean(c**3) / m2**1.5)


def acf(x, K: int) -> np.ndarray:
    """Classic autocorrelations rho_1..rho_K of ``x`` (divisor N-k, full-sample mean)."""
    return build_stack(x, TestFunctionSet.identity(), K).lags[:, 0].copy()

