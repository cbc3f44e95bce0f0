"""Seeded innovations and the four simulated alternatives (AR, MA, SV, GARCH).

Every generator is a pure function of a ``ModelSpec`` and a ``SeedSpec``: the
same pair always reproduces the same array bit for bit.  Sub-streams are
derived by hashing ``(master_seed, stream_index)`` through numpy's
``SeedSequence``, so replications can run in any order or in parallel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .exceptions import ParameterError, StationarityError

UINT64_MAX = 2**64 - 1

# spawn-key slots inside one stream
_MAIN, _AUX = 0, 1


def derive_seed(master_seed: int, *keys: int) -> int:
    """Mix ``master_seed`` with integer keys into a new 64-bit seed."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) <= UINT64_MAX:
            raise ParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if int(self.stream_index) < 0:
            raise ParameterError(f"stream_index must be non-negative, got {self.stream_index}")

    def generator(self, slot: int = _MAIN) -> np.random.Generator:
        ss = np.random.SeedSequence(
            int(self.master_seed), spawn_key=(int(self.stream_index), slot)
        )
        return np.random.Generator(np.random.PCG64(ss))


class LawKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class InnovationLaw:
    """Innovation distribution.

    ``standardized=True`` rescales the Laplace law to unit variance (scale
    1/sqrt(2)); ``False`` keeps the density 0.5*exp(-|z|), whose variance is 2.
    The Gaussian law always has unit variance.
    """

    kind: LawKind = LawKind.GAUSSIAN
    standardized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", LawKind(self.kind))

    @property
    def variance(self) -> float:
        if self.kind is LawKind.LAPLACE and not self.standardized:
            return 2.0
        return 1.0

    @property
    def label(self) -> str:
        if self.kind is LawKind.LAPLACE and not self.standardized:
            return "laplace-literal"
        return self.kind.value

    @classmethod
    def from_label(cls, label: str) -> "InnovationLaw":
        if label == "laplace-literal":
            return cls(LawKind.LAPLACE, standardized=False)
        return cls(LawKind(label))


GAUSSIAN = InnovationLaw(LawKind.GAUSSIAN)
LAPLACE = InnovationLaw(LawKind.LAPLACE)


def _sample(rng: np.random.Generator, law: InnovationLaw, n: int) -> np.ndarray:
    if law.kind is LawKind.GAUSSIAN:
        return rng.standard_normal(n)
    scale = 1.0 / math.sqrt(2.0) if law.standardized else 1.0
    # inverse CDF; u == 0 would map to -inf
    u = np.maximum(rng.random(n), np.finfo(float).tiny)
    lower = u < 0.5
    z = np.empty(n)
    z[lower] = scale * np.log(2.0 * u[lower])
    z[~lower] = -scale * np.log(2.0 * (1.0 - u[~lower]))
    return z


def draw_innovations(seed: SeedSpec, law: InnovationLaw, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. innovations from the main stream of ``seed``."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return _sample(seed.generator(_MAIN), law, n)


def _aux_innovations(seed: SeedSpec, law: InnovationLaw, n: int) -> np.ndarray:
    return _sample(seed.generator(_AUX), law, n)


class Family(str, enum.Enum):
    IID = "iid"
    AR1 = "ar1"
    MA1 = "ma1"
    SV = "sv"
    GARCH11 = "garch"


@dataclass(frozen=True)
class ModelSpec:
    """A simulated model together with its sample length.

    ``a`` is the dependence parameter in (0, 1).  For GARCH either ``a`` is
    given (all three coefficients set to a/3) or ``garch_coeffs = (a0, b, c)``
    spells out V_t^2 = a0 + b X_{t-1}^2 + c V_{t-1}^2.  The IID family ignores
    ``a`` and emits the innovations themselves.
    """

    family: Family
    a: float | None = None
    innovation: InnovationLaw = GAUSSIAN
    length: int = 100
    garch_coeffs: tuple[float, float, float] | None = None
    burn_in: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.length < 2:
            raise ParameterError(f"length must be >= 2, got {self.length}")
        if self.burn_in < 0:
            raise ParameterError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.family is Family.GARCH11 and self.garch_coeffs is not None:
            a0, b, c = (float(v) for v in self.garch_coeffs)
            if a0 <= 0 or b < 0 or c < 0:
                raise ParameterError(f"GARCH needs a0 > 0 and b, c >= 0, got {self.garch_coeffs}")
            if b + c >= 1:
                raise StationarityError(f"GARCH needs b + c < 1 for stationarity, got b + c = {b + c}")
            object.__setattr__(self, "garch_coeffs", (a0, b, c))
        elif self.family is not Family.IID:
            if self.a is None or not 0.0 <= float(self.a) < 1.0 or math.isnan(self.a):
                raise ParameterError(f"parameter a must lie in [0, 1), got {self.a}")

    def coefficients(self) -> tuple[float, float, float]:
        """GARCH coefficients (a0, b, c); the single-parameter form splits ``a`` evenly."""
        if self.family is not Family.GARCH11:
            raise ParameterError("coefficients() only applies to the GARCH family")
        if self.garch_coeffs is not None:
            return self.garch_coeffs
        third = float(self.a) / 3.0
        return (third, third, third)


# Pure recursions.  Kept separate from the samplers so they can be exercised
# with hand-picked innovation sequences.


def ar1_recursion(z: np.ndarray, a: float) -> np.ndarray:
    """X_t = a X_{t-1} + Z_t with X_0 = 0."""
    return lfilter([1.0], [1.0, -float(a)], np.asarray(z, dtype=float))


def ma1_recursion(z: np.ndarray, a: float, z0: float) -> np.ndarray:
    """X_t = Z_t + a Z_{t-1}, where Z_0 = ``z0`` precedes ``z``."""
    z = np.asarray(z, dtype=float)
    prev = np.concatenate(([float(z0)], z[:-1]))
    return z + float(a) * prev


def sv_recursion(z: np.ndarray, w: np.ndarray, a: float) -> tuple[np.ndarray, np.ndarray]:
    """X_t = exp(V_t) Z_t with V_t = a V_{t-1} + W_t, V_0 = 0.

    Returns ``(x, volatility)`` where volatility is exp(V_t).
    """
    vol = np.exp(ar1_recursion(w, a))
    return vol * np.asarray(z, dtype=float), vol


def garch_recursion(z: np.ndarray, a0: float, b: float, c: float) -> tuple[np.ndarray, np.ndarray]:
    """X_t = V_t Z_t with V_t^2 = a0 + b X_{t-1}^2 + c V_{t-1}^2.

    Starts from X_0 = 0 and V_0^2 at the unconditional variance a0 / (1 - b - c).
    Returns ``(x, volatility)`` where volatility is V_t.
    """
    if b + c >= 1:
        raise StationarityError(f"GARCH needs b + c < 1 for stationarity, got b + c = {b + c}")
    z = np.asarray(z, dtype=float)
    n = z.size
    x = np.empty(n)
    vol = np.empty(n)
    x_prev = 0.0
    var_prev = a0 / (1.0 - b - c)
    for t in range(n):
        var_t = a0 + b * x_prev * x_prev + c * var_prev
        vol[t] = math.sqrt(var_t)
        x[t] = vol[t] * z[t]
        x_prev, var_prev = x[t], var_t
    return x, vol


def _check_family(spec: ModelSpec, family: Family):
    if spec.family is not family:
        raise ParameterError(f"expected a {family.value} spec, got {spec.family.value}")


def simulate_ar1(spec: ModelSpec, seed: SeedSpec) -> np.ndarray:
    _check_family(spec, Family.AR1)
    total = spec.length + spec.burn_in
    z = draw_innovations(seed, spec.innovation, total)
    return ar1_recursion(z, spec.a)[spec.burn_in:]


def simulate_ma1(spec: ModelSpec, seed: SeedSpec) -> np.ndarray:
    _check_family(spec, Family.MA1)
    total = spec.length + spec.burn_in
    z = draw_innovations(seed, spec.innovation, total)
    z0 = _aux_innovations(seed, spec.innovation, 1)[0]
    return ma1_recursion(z, spec.a, z0)[spec.burn_in:]


def simulate_sv(spec: ModelSpec, seed: SeedSpec, *, return_volatility: bool = False):
    """Stochastic volatility path; W_t is always standard Gaussian."""
    _check_family(spec, Family.SV)
    total = spec.length + spec.burn_in
    z = draw_innovations(seed, spec.innovation, total)
    w = _aux_innovations(seed, GAUSSIAN, total)
    x, vol = sv_recursion(z, w, spec.a)
    x, vol = x[spec.burn_in:], vol[spec.burn_in:]
    return (x, vol) if return_volatility else x


def simulate_garch(spec: ModelSpec, seed: SeedSpec, *, return_volatility: bool = False):
    _check_family(spec, Family.GARCH11)
    total = spec.length + spec.burn_in
    z = draw_innovations(seed, spec.innovation, total)
    x, vol = garch_recursion(z, *spec.coefficients())
    x, vol = x[spec.burn_in:], vol[spec.burn_in:]
    return (x, vol) if return_volatility else x


def simulate(spec: ModelSpec, seed: SeedSpec, *, return_volatility: bool = False):
    """Dispatch on ``spec.family``.

    With ``return_volatility=True`` returns ``(x, v)`` where ``x = v * Z``; only
    SV and GARCH carry a volatility path.
    """
    fam = spec.family
    if fam in (Family.SV, Family.GARCH11):
        sim = simulate_sv if fam is Family.SV else simulate_garch
        return sim(spec, seed, return_volatility=return_volatility)
    if return_volatility:
        raise ParameterError(f"{fam.value} has no volatility path")
    if fam is Family.IID:
        total = spec.length + spec.burn_in
        return draw_innovations(seed, spec.innovation, total)[spec.burn_in:]
    if fam is Family.AR1:
        return simulate_ar1(spec, seed)
    return simulate_ma1(spec, seed)


def write_series_csv(path, x, v=None, comments=()):
    """Write a single-column CSV with header ``x`` (plus ``v`` if given).

    ``comments`` are emitted first as ``# ...`` lines.
    """
    x = np.asarray(x, dtype=float)
    lines = [f"# {c}" for c in comments]
    if v is None:
        lines.append("x")
        lines.extend(repr(float(val)) for val in x)
    else:
        v = np.asarray(v, dtype=float)
        lines.append("x,v")
        lines.extend(f"{float(a)!r},{float(b)!r}" for a, b in zip(x, v))
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
