"""
Truncated cosine series for even 2π-periodic functions.

A CosineSeries stores coefficients c_0..c_N of

    f(x) = c_0 + c_1 cos(x) + ... + c_N cos(Nx)

so coeffs[0] multiplies the constant 1 (the mean). Two scalar backends share
one interface:

- rational: fractions.Fraction, used when a coefficient must be certified zero
- float:    numpy float64 arrays, used by the Newton solver

Products are exact to full degree; callers truncate explicitly.
"""

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from settings import DEFAULT_SETTINGS
from wilton_errors import (
    InvalidParameterError,
    ModeMismatchError,
    NearResonanceError,
    NotInRangeError,
)

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, int, float]


class ScalarMode(str, Enum):
    RATIONAL = "rational"
    FLOAT = "float"


def _to_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    raise ModeMismatchError(
        f"Cannot place {value!r} ({type(value).__name__}) in a rational series",
        suggestions=["use fractions.Fraction or int scalars in rational mode",
                     "convert the series with to_float() first"],
    )


def coerce_scalar(value, mode: ScalarMode) -> Scalar:
    """Cast a scalar into the given backend; floats never enter rational mode"""
    if ScalarMode(mode) is ScalarMode.RATIONAL:
        return _to_rational(value)
    return float(value)


# ============================================================================
# COSINE SERIES
# ============================================================================

class CosineSeries:
    """Even 2π-periodic function as finite cosine-mode coefficients"""

    __slots__ = ("_coeffs", "mode")

    def __init__(self, coeffs: Sequence, mode: ScalarMode = ScalarMode.RATIONAL):
        mode = ScalarMode(mode)
        if len(coeffs) == 0:
            coeffs = [0]
        if mode is ScalarMode.RATIONAL:
            values = tuple(_to_rational(c) for c in coeffs)
        else:
            values = np.array([float(c) for c in coeffs], dtype=float)
            if not np.all(np.isfinite(values)):
                raise InvalidParameterError("Float cosine series contains non-finite coefficients")
            values.setflags(write=False)
        self._coeffs = values
        self.mode = mode

    @property
    def coeffs(self):
        """Tuple of Fractions (rational) or read-only float64 array (float)"""
        return self._coeffs

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    @property
    def is_exact(self) -> bool:
        return self.mode is ScalarMode.RATIONAL

    def coefficient(self, k: int) -> Scalar:
        if k < 0:
            raise InvalidParameterError(f"Negative mode index {k}")
        if k > self.degree:
            return Fraction(0) if self.is_exact else 0.0
        return self._coeffs[k]

    def nonzero_items(self) -> Iterator[Tuple[int, Scalar]]:
        for k, value in enumerate(self._coeffs):
            if value != 0:
                yield k, value

    def padded(self, degree: int) -> List[Scalar]:
        values = list(self._coeffs)
        zero = Fraction(0) if self.is_exact else 0.0
        return values + [zero] * (degree - self.degree)

    def truncate(self, degree: int) -> "CosineSeries":
        """Cut (or zero-pad) to the given degree"""
        if degree < 0:
            raise InvalidParameterError(f"Negative truncation degree {degree}")
        if degree >= self.degree:
            return CosineSeries(self.padded(degree), self.mode)
        return CosineSeries(self._coeffs[:degree + 1], self.mode)

    def trimmed(self) -> "CosineSeries":
        """Drop trailing exact zeros (degree shrinks, value unchanged)"""
        last = 0
        for k, _ in self.nonzero_items():
            last = k
        return self.truncate(last)

    def with_coefficient(self, k: int, value: Scalar) -> "CosineSeries":
        values = self.padded(max(k, self.degree))
        values[k] = coerce_scalar(value, self.mode)
        return CosineSeries(values, self.mode)

    def without_modes(self, modes: Iterable[int]) -> "CosineSeries":
        values = self.padded(self.degree)
        for k in modes:
            if k <= self.degree:
                values[k] = Fraction(0) if self.is_exact else 0.0
        return CosineSeries(values, self.mode)

    def to_float(self) -> "CosineSeries":
        if not self.is_exact:
            return self
        return CosineSeries([float(c) for c in self._coeffs], ScalarMode.FLOAT)

    def to_mode(self, mode: ScalarMode) -> "CosineSeries":
        mode = ScalarMode(mode)
        if mode is self.mode:
            return self
        if mode is ScalarMode.FLOAT:
            return self.to_float()
        raise ModeMismatchError("Float series cannot be converted to exact rationals")

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self._coeffs], dtype=float)

    # operators delegate to the module functions below
    def __add__(self, other: "CosineSeries") -> "CosineSeries":
        return linear_combine([(1, self), (1, other)])

    def __sub__(self, other: "CosineSeries") -> "CosineSeries":
        return linear_combine([(1, self), (-1, other)])

    def __neg__(self) -> "CosineSeries":
        return linear_combine([(-1, self)])

    def __mul__(self, other):
        if isinstance(other, CosineSeries):
            return multiply(self, other)
        return linear_combine([(other, self)])

    def __rmul__(self, other):
        return linear_combine([(other, self)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, CosineSeries) or other.mode is not self.mode:
            return NotImplemented if not isinstance(other, CosineSeries) else False
        degree = max(self.degree, other.degree)
        if self.is_exact:
            return self.padded(degree) == other.padded(degree)
        return bool(np.array_equal(np.asarray(self.padded(degree)),
                                   np.asarray(other.padded(degree))))

    __hash__ = None

    def __repr__(self) -> str:
        terms = ", ".join(str(c) for c in self._coeffs)
        return f"CosineSeries([{terms}], mode={self.mode.value})"

    # ------------------------------------------------------------------
    # JSON: {"degree": N, "mode": ..., "coeffs": ["p/q", ...] | [float, ...]}
    # ------------------------------------------------------------------

    def to_dict(self) -> dict:
        if self.is_exact:
            coeffs = [f"{c.numerator}/{c.denominator}" for c in self._coeffs]
        else:
            coeffs = [float(c) for c in self._coeffs]
        return {"degree": self.degree, "mode": self.mode.value, "coeffs": coeffs}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "CosineSeries":
        try:
            mode = ScalarMode(data["mode"])
            raw = data["coeffs"]
            degree = int(data["degree"])
        except (KeyError, ValueError, TypeError) as e:
            raise InvalidParameterError(f"Malformed cosine series JSON: {e}")
        if len(raw) != degree + 1:
            raise InvalidParameterError(
                f"Cosine series JSON declares degree {degree} but lists {len(raw)} coefficients")
        if mode is ScalarMode.RATIONAL:
            return cls([Fraction(str(c)) for c in raw], mode)
        return cls([float(c) for c in raw], mode)

    @classmethod
    def from_json(cls, text: str) -> "CosineSeries":
        return cls.from_dict(json.loads(text))


def zero_series(degree: int = 0, mode: ScalarMode = ScalarMode.RATIONAL) -> CosineSeries:
    return CosineSeries([0] * (degree + 1), mode)


def basis(k: int, mode: ScalarMode = ScalarMode.RATIONAL, scale: Scalar = 1) -> CosineSeries:
    """scale * cos(kx)"""
    if k < 0:
        raise InvalidParameterError(f"Negative mode index {k}")
    values = [0] * (k + 1)
    values[k] = coerce_scalar(scale, mode)
    return CosineSeries(values, mode)


def _common_mode(series: Sequence[CosineSeries]) -> ScalarMode:
    modes = {s.mode for s in series}
    if len(modes) > 1:
        raise ModeMismatchError(
            "Cannot combine rational and float cosine series",
            suggestions=["convert the rational operands with to_float()"],
        )
    return series[0].mode


# ============================================================================
# RING OPERATIONS
# ============================================================================

def linear_combine(terms: Iterable[Tuple[Scalar, CosineSeries]]) -> CosineSeries:
    """Coefficient-wise Σ s_i f_i; degree is the largest input degree"""
    terms = list(terms)
    if not terms:
        return zero_series()
    mode = _common_mode([f for _, f in terms])
    degree = max(f.degree for _, f in terms)
    if mode is ScalarMode.FLOAT:
        acc = np.zeros(degree + 1)
        for s, f in terms:
            acc[:f.degree + 1] += float(s) * f.coeffs
        return CosineSeries(acc, mode)
    acc = [Fraction(0)] * (degree + 1)
    for s, f in terms:
        s = _to_rational(s)
        if s == 0:
            continue
        for k, value in f.nonzero_items():
            acc[k] += s * value
    return CosineSeries(acc, mode)


def multiply(f: CosineSeries, g: CosineSeries) -> CosineSeries:
    """
    Exact product of degree deg(f) + deg(g).

    Uses cos(mx)cos(nx) = ½cos((m+n)x) + ½cos(|m-n|x), which also holds for
    m = 0 or n = 0 under the mean-mode convention.
    """
    mode = _common_mode([f, g])
    if mode is ScalarMode.FLOAT:
        a = np.asarray(f.coeffs)
        b = np.asarray(g.coeffs)
        out = 0.5 * np.convolve(a, b)
        cross = np.convolve(a, b[::-1])
        lags = np.arange(cross.size) - (b.size - 1)
        np.add.at(out, np.abs(lags), 0.5 * cross)
        return CosineSeries(out, mode)

    out = [Fraction(0)] * (f.degree + g.degree + 1)
    g_items = list(g.nonzero_items())
    for m, fm in f.nonzero_items():
        for n, gn in g_items:
            half = fm * gn / 2
            out[m + n] += half
            out[abs(m - n)] += half
    return CosineSeries(out, mode)


def truncate(f: CosineSeries, degree: int) -> CosineSeries:
    return f.truncate(degree)


# ============================================================================
# KAWAHARA LINEAR OPERATOR
# ============================================================================

@dataclass(frozen=True)
class KawaharaConfig:
    """
    Parameters of (c + L) with L = ∂²ₓ + β∂⁴ₓ.

    K is the resonant partner mode (beta = 1/(1+K²)); K=None describes a
    non-resonant (Stokes) setting with the one-dimensional kernel {cos x}.
    """
    beta: Scalar
    K: Optional[int] = None
    mode: ScalarMode = ScalarMode.RATIONAL

    def __post_init__(self):
        object.__setattr__(self, "mode", ScalarMode(self.mode))
        object.__setattr__(self, "beta", coerce_scalar(self.beta, self.mode))

    @classmethod
    def wilton(cls, K: int, mode: ScalarMode = ScalarMode.RATIONAL) -> "KawaharaConfig":
        if isinstance(K, bool) or not isinstance(K, (int, np.integer)) or K < 2:
            raise InvalidParameterError(
                f"Resonant mode K must be an integer >= 2, got {K!r}",
                suggestions=["K=2 gives beta=1/5, K=3 gives beta=1/10"],
            )
        K = int(K)
        beta = Fraction(1, 1 + K * K)
        return cls(beta if ScalarMode(mode) is ScalarMode.RATIONAL else float(beta), K, mode)

    @classmethod
    def stokes(cls, beta: Scalar, mode: ScalarMode = ScalarMode.FLOAT) -> "KawaharaConfig":
        return cls(beta, None, mode)

    @property
    def c0(self) -> Scalar:
        return 1 - self.beta

    @property
    def kernel_modes(self) -> Tuple[int, ...]:
        return (1,) if self.K is None else (1, self.K)

    def symbol(self, k: int) -> Scalar:
        """Eigenvalue of L on cos(kx): -k² + beta k⁴"""
        return -k * k + self.beta * k ** 4

    def shifted(self, k: int, c: Optional[Scalar] = None) -> Scalar:
        """c + symbol(k), with c defaulting to c0"""
        return (self.c0 if c is None else c) + self.symbol(k)

    def symbols(self, degree: int) -> np.ndarray:
        k = np.arange(degree + 1, dtype=float)
        return -k ** 2 + float(self.beta) * k ** 4

    def as_mode(self, mode: ScalarMode) -> "KawaharaConfig":
        mode = ScalarMode(mode)
        if mode is self.mode:
            return self
        if mode is ScalarMode.FLOAT:
            return KawaharaConfig(float(self.beta), self.K, mode)
        if self.K is not None:
            return KawaharaConfig.wilton(self.K, mode)
        raise ModeMismatchError("A float beta cannot be promoted to an exact rational")


def _config_for(f: CosineSeries, cfg: KawaharaConfig) -> KawaharaConfig:
    if f.mode is cfg.mode:
        return cfg
    if f.mode is ScalarMode.FLOAT:
        return cfg.as_mode(ScalarMode.FLOAT)
    raise ModeMismatchError(
        "Rational series cannot be combined with a float Kawahara configuration",
        suggestions=["build the configuration with asymptotics.config(K)"],
    )


def apply_shifted_operator(f: CosineSeries, c: Scalar, cfg: KawaharaConfig) -> CosineSeries:
    """(c + L) f: coefficient k is scaled by c + symbol(k)"""
    cfg = _config_for(f, cfg)
    c = coerce_scalar(c, f.mode)
    if f.mode is ScalarMode.FLOAT:
        return CosineSeries(np.asarray(f.coeffs) * (c + cfg.symbols(f.degree)), f.mode)
    return CosineSeries([value * (c + cfg.symbol(k)) for k, value in enumerate(f.coeffs)], f.mode)


def complement_projection(f: CosineSeries, cfg: KawaharaConfig) -> CosineSeries:
    """Q f: remove the kernel modes"""
    return f.without_modes(cfg.kernel_modes)


def invert_on_complement(f: CosineSeries, cfg: KawaharaConfig,
                         rel_tol: Optional[float] = None,
                         resonance_tol: Optional[float] = None) -> CosineSeries:
    """
    Solve (c0 + L) g = f for g orthogonal to the kernel.

    f must carry no kernel modes; g[k] = f[k] / (c0 + symbol(k)) elsewhere.
    """
    cfg = _config_for(f, cfg)
    rel_tol = DEFAULT_SETTINGS.invert_rel_tol if rel_tol is None else rel_tol
    resonance_tol = DEFAULT_SETTINGS.near_resonance_tol if resonance_tol is None else resonance_tol
    kernel = cfg.kernel_modes

    if f.is_exact:
        offending = [k for k in kernel if f.coefficient(k) != 0]
    else:
        scale = float(np.max(np.abs(f.coeffs))) if f.degree >= 0 else 0.0
        offending = [k for k in kernel if abs(f.coefficient(k)) > rel_tol * scale]
    if offending:
        raise NotInRangeError(
            f"Series has nonzero kernel modes {offending}; it is not in the range of c0 + L",
            suggestions=["apply complement_projection() before inverting"],
            details={"modes": offending},
        )

    out = []
    for k, value in enumerate(f.coeffs):
        if k in kernel:
            out.append(0)
            continue
        divisor = cfg.shifted(k)
        if divisor == 0 or (not f.is_exact and abs(divisor) < resonance_tol):
            raise NearResonanceError(
                f"c0 + symbol({k}) = {divisor} vanishes off the kernel; beta={cfg.beta} "
                f"does not match K={cfg.K}",
                mode=k, divisor=divisor,
                suggestions=["check that beta = 1/(1+K^2) for the requested K"],
            )
        out.append(value / divisor)
    return CosineSeries(out, f.mode)


# ============================================================================
# FOURIER UTILITIES
# ============================================================================

@dataclass(frozen=True)
class SeriesNorms:
    l2: float
    h4: float
    sup: float


def fourier_coeff(f: CosineSeries, k: int) -> Scalar:
    return f.coefficient(k)


def evaluate(f: CosineSeries, x):
    """Pointwise Σ coeffs[k] cos(kx); x may be a scalar or an array"""
    coeffs = f.as_array()
    x_arr = np.asarray(x, dtype=float)
    k = np.arange(coeffs.size, dtype=float)
    values = np.cos(np.multiply.outer(x_arr, k)) @ coeffs
    if x_arr.ndim == 0:
        return float(values)
    return values


def uniform_grid(npoints: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(npoints) / npoints


def sup_on_grid(f: CosineSeries, npoints: Optional[int] = None) -> float:
    npoints = npoints or 4 * max(f.degree, 1)
    return float(np.max(np.abs(evaluate(f, uniform_grid(npoints)))))


def norms(f: CosineSeries) -> SeriesNorms:
    coeffs = f.as_array()
    k = np.arange(coeffs.size, dtype=float)
    l2 = math.sqrt(math.pi * (2.0 * coeffs[0] ** 2 + float(np.sum(coeffs[1:] ** 2))))
    h4 = math.sqrt(float(np.sum((1.0 + k ** 2) ** 4 * coeffs ** 2)))
    return SeriesNorms(l2=l2, h4=h4, sup=sup_on_grid(f))
