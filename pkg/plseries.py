"""
Order-by-order amplitude expansions of Wilton ripples and Stokes waves.

Substitutes u = Σ aⁿ uₙ and c = c0 + Σ aⁿ cₙ into (c + L)u + u² = 0 and
solves the hierarchy one power of a at a time. The amplitude is normalized by
𝓕₁[u] = a, so 𝓕₁[uₙ] = 0 for n >= 2.

Quantities not yet fixed by the kernel projections (cₙ and the cos Kx
amplitude bₙ of uₙ) are carried as symbols. Each order contributes one linear
equation per kernel mode; the pending equations are solved as soon as they
pin down every symbol they mention, and the values are substituted back.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

import asymptotics
from settings import DEFAULT_SETTINGS, Settings
from trigpoly import (
    CosineSeries,
    KawaharaConfig,
    ScalarMode,
    apply_shifted_operator,
    basis,
    coerce_scalar,
    complement_projection,
    invert_on_complement,
    linear_combine,
    multiply,
    sup_on_grid,
    zero_series,
)
from wilton_errors import (
    DegenerateBranchError,
    FailedOrderError,
    InconclusiveOrderError,
    InvalidParameterError,
    ModeUnsupportedError,
)

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, float]
Monomial = Tuple[str, ...]

MAX_LAG = 3
STOKES_LABEL = "stokes"


# ============================================================================
# SYMBOLIC SERIES
# ============================================================================

class SymbolicSeries:
    """Polynomial in the unresolved symbols with CosineSeries coefficients"""

    __slots__ = ("terms", "mode")

    def __init__(self, terms: Dict[Monomial, CosineSeries], mode: ScalarMode):
        self.terms = {m: s for m, s in terms.items() if any(v != 0 for v in s.coeffs)}
        self.mode = mode

    @classmethod
    def known(cls, series: CosineSeries) -> "SymbolicSeries":
        return cls({(): series}, series.mode)

    @classmethod
    def scalar(cls, value: Scalar, mode: ScalarMode) -> "SymbolicSeries":
        return cls({(): CosineSeries([value], mode)}, mode)

    @classmethod
    def symbol(cls, name: str, series: CosineSeries) -> "SymbolicSeries":
        return cls({(name,): series}, series.mode)

    def __add__(self, other: "SymbolicSeries") -> "SymbolicSeries":
        terms = dict(self.terms)
        for m, s in other.terms.items():
            terms[m] = terms[m] + s if m in terms else s
        return SymbolicSeries(terms, self.mode)

    def __mul__(self, other: "SymbolicSeries") -> "SymbolicSeries":
        terms: Dict[Monomial, CosineSeries] = {}
        for m1, s1 in self.terms.items():
            for m2, s2 in other.terms.items():
                key = tuple(sorted(m1 + m2))
                product = multiply(s1, s2)
                terms[key] = terms[key] + product if key in terms else product
        return SymbolicSeries(terms, self.mode)

    def map(self, fn) -> "SymbolicSeries":
        return SymbolicSeries({m: fn(s) for m, s in self.terms.items()}, self.mode)

    def symbols(self) -> FrozenSet[str]:
        return frozenset(name for m in self.terms for name in m)

    def coefficient(self, k: int) -> Dict[Monomial, Scalar]:
        out = {}
        for m, s in self.terms.items():
            value = s.coefficient(k)
            if value != 0:
                out[m] = value
        return out

    def substitute(self, values: Dict[str, Scalar]) -> "SymbolicSeries":
        terms: Dict[Monomial, CosineSeries] = {}
        for m, s in self.terms.items():
            factor = coerce_scalar(1, self.mode)
            remaining = []
            for name in m:
                if name in values:
                    factor = factor * values[name]
                else:
                    remaining.append(name)
            key = tuple(remaining)
            term = linear_combine([(factor, s)])
            terms[key] = terms[key] + term if key in terms else term
        return SymbolicSeries(terms, self.mode)

    def resolved(self) -> CosineSeries:
        if self.symbols():
            raise DegenerateBranchError(f"Unresolved symbols {sorted(self.symbols())} remain")
        return self.terms.get((), zero_series(0, self.mode))


def _solve_rational(rows: List[List[Fraction]], rhs: List[Fraction], n: int) -> Optional[List[Fraction]]:
    """Exact solve over the rationals; None when the columns are not independent"""
    A = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in rows])
    b = sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in rhs])
    if A.rank() < A.cols:
        return None
    try:
        x, _ = A.gauss_jordan_solve(b)
    except ValueError:
        raise DegenerateBranchError(f"Kernel projections at order {n} are inconsistent (exact)", order=n)
    return [Fraction(int(v.p), int(v.q)) for v in x]


class _Hierarchy:
    """Shared order-by-order engine for Wilton and Stokes expansions"""

    def __init__(self, cfg: KawaharaConfig, u1: CosineSeries, seeds: Dict[str, Scalar],
                 settings: Settings):
        self.cfg = cfg
        self.mode = cfg.mode
        self.settings = settings
        self.values: Dict[str, Scalar] = dict(seeds)
        self.u: List[SymbolicSeries] = [SymbolicSeries.known(u1)]
        self.c: List[SymbolicSeries] = []
        self.pending: List[Tuple[int, Dict[Monomial, Scalar]]] = []

    def _velocity(self, m: int) -> SymbolicSeries:
        name = f"c{m}"
        if name in self.values:
            return SymbolicSeries.scalar(self.values[name], self.mode)
        return SymbolicSeries.symbol(name, basis(0, self.mode))

    def step(self, n: int):
        if len(self.c) < n - 1:
            self.c.append(self._velocity(n - 1))
        forcing = SymbolicSeries({}, self.mode)
        for m in range(1, n):
            forcing = forcing + self.c[m - 1] * self.u[n - m - 1]
            forcing = forcing + self.u[m - 1] * self.u[n - m - 1]

        for k in self.cfg.kernel_modes:
            equation = forcing.coefficient(k)
            if equation:
                self.pending.append((n, equation))
        solved = self._solve_pending(n)
        if solved:
            forcing = forcing.substitute(solved)

        w = forcing.map(lambda s: invert_on_complement(
            -complement_projection(s, self.cfg), self.cfg,
            rel_tol=self.settings.invert_rel_tol,
            resonance_tol=self.settings.near_resonance_tol))
        if self.cfg.K is not None:
            w = w + SymbolicSeries.symbol(f"b{n}", basis(self.cfg.K, self.mode))
        self.u.append(w)

    def _solve_pending(self, n: int) -> Dict[str, Scalar]:
        unknowns = sorted({name for _, eq in self.pending for m in eq for name in m})
        for _, eq in self.pending:
            if any(len(m) > 1 for m in eq):
                raise DegenerateBranchError(
                    f"Kernel projection at order {n} is nonlinear in {sorted(unknowns)}", order=n)

        constant_only = [eq for _, eq in self.pending if set(eq) <= {()}]
        for eq in constant_only:
            self._check_consistent(eq.get((), 0), n)
        self.pending = [(o, eq) for o, eq in self.pending if not set(eq) <= {()}]

        solution = {}
        if unknowns and self.pending:
            rows = [[eq.get((name,), 0) for name in unknowns] for _, eq in self.pending]
            rhs = [-eq.get((), 0) for _, eq in self.pending]
            x = self._linear_solve(rows, rhs, n)
            if x is not None:
                solution = dict(zip(unknowns, x))
                self.pending = []
                logger.debug(f"order {n}: solved {', '.join(f'{k}={v}' for k, v in solution.items())}")

        for origin, _ in self.pending:
            if n - origin >= MAX_LAG:
                raise DegenerateBranchError(
                    f"Kernel projections from order {origin} stayed underdetermined for {MAX_LAG} orders",
                    order=origin,
                    suggestions=["the reduced Jacobian of this branch is singular"],
                )
        if solution:
            self.values.update(solution)
            self.u = [s.substitute(solution) for s in self.u]
            self.c = [s.substitute(solution) for s in self.c]
        return solution

    def _linear_solve(self, rows, rhs, n: int):
        if self.mode is ScalarMode.RATIONAL:
            return _solve_rational(rows, rhs, n)
        A = np.array(rows, dtype=float)
        b = np.array(rhs, dtype=float)
        if np.linalg.matrix_rank(A) < A.shape[1]:
            return None
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        scale = max(1.0, float(np.max(np.abs(b))), float(np.max(np.abs(A))))
        misfit = float(np.max(np.abs(A @ x - b)))
        if misfit > self.settings.kernel_residual_tol * scale:
            raise DegenerateBranchError(
                f"Kernel projections at order {n} are inconsistent (misfit {misfit:.3e})", order=n)
        return [float(v) for v in x]

    def _check_consistent(self, value: Scalar, n: int):
        if self.mode is ScalarMode.RATIONAL:
            ok = value == 0
        else:
            ok = abs(value) <= self.settings.kernel_residual_tol
        if not ok:
            raise DegenerateBranchError(
                f"Kernel projection at order {n} does not vanish: {value}", order=n,
                suggestions=["the branch constants do not solve the reduced system"])

    def run(self, M: int) -> Tuple[List[CosineSeries], List[Scalar]]:
        # b_M is only pinned down two orders after it appears
        for n in range(2, M + 3):
            self.step(n)
        u = [s.resolved().trimmed() for s in self.u[:M]]
        c = [coerce_scalar(s.resolved().coefficient(0), self.mode) for s in self.c[:M]]
        return u, c


# ============================================================================
# PLSERIES
# ============================================================================

@dataclass(frozen=True)
class PLSeries:
    """u = Σ aⁿ uₙ, c = c0 + Σ aⁿ cₙ for n = 1..order"""
    K: Optional[int]
    label: str
    order: int
    u: Tuple[CosineSeries, ...]
    c: Tuple[Scalar, ...]
    mode: ScalarMode
    beta: Scalar

    @property
    def c0(self) -> Scalar:
        return 1 - self.beta

    @property
    def config(self) -> KawaharaConfig:
        return KawaharaConfig(self.beta, self.K, self.mode)

    @property
    def is_exact(self) -> bool:
        return self.mode is ScalarMode.RATIONAL

    def kernel_amplitudes(self) -> List[Scalar]:
        """𝓕_K[uₙ] for n = 1..order (empty for Stokes)"""
        if self.K is None:
            return []
        return [un.coefficient(self.K) for un in self.u]

    def truncated(self, M: int) -> "PLSeries":
        if not 1 <= M <= self.order:
            raise InvalidParameterError(f"Cannot truncate an order-{self.order} series to {M}")
        return PLSeries(self.K, self.label, M, self.u[:M], self.c[:M], self.mode, self.beta)

    def to_dict(self) -> dict:
        def scalar(x):
            return str(x) if isinstance(x, Fraction) else float(x)

        return {
            "K": self.K,
            "branch": self.label,
            "order": self.order,
            "mode": self.mode.value,
            "beta": scalar(self.beta),
            "c0": scalar(self.c0),
            "u": [un.to_dict() for un in self.u],
            "c": [scalar(cn) for cn in self.c],
            "kernel_amplitudes": [scalar(b) for b in self.kernel_amplitudes()],
        }


def _branch_seeds(branch: asymptotics.BranchConstants, mode: ScalarMode) -> Dict[str, Scalar]:
    seeds = {f"c{branch.velocity_order}": coerce_scalar(branch.velocity_coefficient, mode),
             "b1": coerce_scalar(branch.kernel_amplitude, mode)}
    return seeds


def expand(K: int, branch, M: int, mode: ScalarMode = ScalarMode.FLOAT,
           settings: Settings = DEFAULT_SETTINGS) -> PLSeries:
    """Amplitude expansion of one Wilton branch up to order M"""
    mode = ScalarMode(mode)
    constants = asymptotics.find_branch(K, branch)
    if M < 1:
        raise InvalidParameterError(f"Expansion order must be >= 1, got {M}")
    if mode is ScalarMode.RATIONAL and not constants.exact:
        raise ModeUnsupportedError(
            f"K={K} branch {constants.label} has irrational constants; exact mode is unavailable",
            suggestions=["use float mode for K=2 and K=3", "exact expansions need K >= 4"],
        )

    cfg = asymptotics.config(K).as_mode(mode)
    seeds = _branch_seeds(constants, mode)
    u1 = linear_combine([(1, basis(1, mode)), (seeds["b1"], basis(K, mode))])
    logger.debug(f"expanding K={K} branch {constants.label} to order {M} ({mode.value})")
    u, c = _Hierarchy(cfg, u1, seeds, settings).run(M)
    return PLSeries(K, constants.label, M, tuple(u), tuple(c), mode, cfg.beta)


def expand_stokes(beta: Scalar, M: int, mode: ScalarMode = ScalarMode.FLOAT,
                  settings: Settings = DEFAULT_SETTINGS) -> PLSeries:
    """Same hierarchy with the one-dimensional kernel {cos x}"""
    mode = ScalarMode(mode)
    if M < 1:
        raise InvalidParameterError(f"Expansion order must be >= 1, got {M}")
    if mode is ScalarMode.RATIONAL and not isinstance(beta, (int, Fraction)):
        raise ModeUnsupportedError(f"beta={beta!r} is not rational; use float mode")
    cfg = KawaharaConfig.stokes(beta, mode)
    u, c = _Hierarchy(cfg, basis(1, mode), {}, settings).run(M)
    return PLSeries(None, STOKES_LABEL, M, tuple(u), tuple(c), mode, cfg.beta)


def composed_second_order(K: int, branch) -> CosineSeries:
    """u200 + b1 u110 + b1² u020 in float, b1 being the branch's cos Kx amplitude"""
    constants = asymptotics.find_branch(K, branch)
    corrections = asymptotics.second_order_corrections(K)
    b1 = float(constants.kernel_amplitude)
    return linear_combine([(1.0, corrections[(2, 0, 0)].to_float()),
                           (b1, corrections[(1, 1, 0)].to_float()),
                           (b1 * b1, corrections[(0, 2, 0)].to_float())])


# ============================================================================
# EVALUATION AND DIAGNOSTICS
# ============================================================================

def evaluate(series: PLSeries, a: float) -> Tuple[CosineSeries, float]:
    """Horner sum in float scalars"""
    a = float(a)
    terms = [un.to_float() for un in series.u]
    acc = terms[-1]
    for un in reversed(terms[:-1]):
        acc = linear_combine([(1.0, un), (a, acc)])
    profile = linear_combine([(a, acc)])

    velocity = 0.0
    for cn in reversed(series.c):
        velocity = float(cn) + a * velocity
    velocity = float(series.c0) + a * velocity

    if a != 0 and series.order > 1:
        first = abs(a) * float(np.max(np.abs(terms[0].coeffs)))
        last = abs(a) ** series.order * float(np.max(np.abs(terms[-1].coeffs)))
        if last > first:
            logger.warning(f"a={a:g} is outside the decreasing-terms regime of the order-"
                           f"{series.order} expansion")
    return profile, velocity


def continuous_residual(u: CosineSeries, c: float, cfg: KawaharaConfig) -> CosineSeries:
    """(c + L)u + u² as a cosine series of degree 2·deg(u)"""
    u = u.to_float()
    return linear_combine([(1.0, apply_shifted_operator(u, c, cfg)), (1.0, multiply(u, u))])


def kmode_onset(series: PLSeries) -> Tuple[int, Fraction]:
    """Smallest n with 𝓕_K[uₙ] != 0, tested exactly"""
    if series.K is None:
        raise InvalidParameterError("Stokes expansions have no cos Kx mode")
    if not series.is_exact:
        raise ModeUnsupportedError("Onset detection needs an exact-rational expansion",
                                   suggestions=["expand with mode=rational (K >= 4)"])
    for n, value in enumerate(series.kernel_amplitudes(), start=1):
        if value != 0:
            return n, value
    raise InconclusiveOrderError(
        f"𝓕_{series.K}[uₙ] vanishes for every n <= {series.order}",
        suggestions=[f"raise the order above {series.order}"],
    )


def residual_order(series: PLSeries, a_list: Sequence[float],
                   cfg: Optional[KawaharaConfig] = None, contract: bool = True) -> float:
    """Log-log slope of the sup residual of the truncated expansion"""
    if len(a_list) < 2:
        raise InvalidParameterError("residual_order needs at least two amplitudes")
    cfg = (cfg or series.config).as_mode(ScalarMode.FLOAT)

    amplitudes = [float(a) for a in a_list]
    residuals = []
    for a in amplitudes:
        u, c = evaluate(series, a)
        r = continuous_residual(u, c, cfg)
        residuals.append(sup_on_grid(r, 4 * max(r.degree, 1)))
    slope = float(np.polyfit(np.log2(amplitudes), np.log2(residuals), 1)[0])
    logger.debug(f"order-{series.order} residual slope {slope:.3f} over a={amplitudes}")

    expected = series.order + 1 - 0.2
    if contract and slope < expected:
        raise FailedOrderError(
            f"Residual slope {slope:.3f} is below {expected:.1f} for an order-{series.order} expansion",
            slope=slope, amplitudes=amplitudes, residuals=residuals,
        )
    return slope
