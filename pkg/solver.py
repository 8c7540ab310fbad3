"""
Galerkin-Newton computation of finite-amplitude waves.

The unknowns are the cosine coefficients û_k (k = 0..N, k != 1) and the
velocity c; û_1 = a is held fixed, which removes the cos x kernel direction
and leaves a square system. Seeds come from plseries, continuation marches
the amplitude upward from the previous converged profile.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

import asymptotics
import plseries
from settings import DEFAULT_SETTINGS, Settings
from trigpoly import (
    CosineSeries,
    KawaharaConfig,
    ScalarMode,
    linear_combine,
    norms,
    sup_on_grid,
)
from wilton_errors import (
    BranchLostError,
    DivergedError,
    InvalidParameterError,
    MismatchError,
    ResonanceError,
    SingularSystemError,
)

logger = logging.getLogger(__name__)

F = ScalarMode.FLOAT


def default_truncation(K: Optional[int], settings: Settings = DEFAULT_SETTINGS) -> int:
    return max(4 * (K or 1), settings.min_truncation)


def checked_truncation(K: Optional[int], N: Optional[int], settings: Settings = DEFAULT_SETTINGS) -> int:
    """N itself, or the default; never below max(4K, min_truncation)"""
    floor = default_truncation(K, settings)
    if N is None:
        return floor
    if N < floor:
        raise InvalidParameterError(
            f"Truncation N={N} is below max(4K, {settings.min_truncation}) = {floor}",
            suggestions=[f"use --N {floor} or larger",
                         "lower WILTON_MIN_TRUNCATION to allow smaller truncations"],
        )
    return N


@dataclass(frozen=True)
class GalerkinProblem:
    """Truncated steady equation with the amplitude constraint û_1 = a"""
    cfg: KawaharaConfig
    N: int
    a: float
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "cfg", self.cfg.as_mode(F))
        if self.N < max(2, self.cfg.K or 1):
            raise InvalidParameterError(f"Truncation N={self.N} is too small for K={self.cfg.K}")
        if not math.isfinite(self.a):
            raise InvalidParameterError(f"Amplitude must be finite, got {self.a}")

    @property
    def K(self) -> Optional[int]:
        return self.cfg.K

    def with_amplitude(self, a: float) -> "GalerkinProblem":
        return GalerkinProblem(self.cfg, self.N, a, self.label)

    def with_truncation(self, N: int) -> "GalerkinProblem":
        return GalerkinProblem(self.cfg, N, self.a, self.label)


@dataclass(frozen=True)
class SolveResult:
    profile: CosineSeries
    velocity: float
    a: float
    residual_sup: float
    residual_l2: float
    newton_iters: int
    N: int
    label: str
    measured_b: float
    K: Optional[int]
    beta: float

    @property
    def cfg(self) -> KawaharaConfig:
        return KawaharaConfig(self.beta, self.K, F)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "branch": self.label,
            "beta": self.beta,
            "a": self.a,
            "c": self.velocity,
            "measured_b": self.measured_b,
            "residual_sup": self.residual_sup,
            "residual_l2": self.residual_l2,
            "newton_iters": self.newton_iters,
            "N": self.N,
            "galerkin": "product computed to degree 2N, truncated to N",
            "profile": self.profile.to_dict(),
        }


@dataclass(frozen=True)
class StepRecord:
    a: float
    step: float
    halvings: int
    iters: int


@dataclass(frozen=True)
class BranchPath:
    K: Optional[int]
    label: str
    results: Tuple[SolveResult, ...]
    steps: Tuple[StepRecord, ...] = field(default_factory=tuple)

    def max_jump(self) -> float:
        """Largest sup-distance between consecutive profiles"""
        jumps = [0.0]
        for prev, cur in zip(self.results, self.results[1:]):
            N = max(prev.N, cur.N)
            jumps.append(sup_on_grid(cur.profile - prev.profile, 4 * N))
        return max(jumps)


# ============================================================================
# GALERKIN MAP
# ============================================================================

def _padded(u: CosineSeries, N: int) -> np.ndarray:
    coeffs = u.as_array()
    if coeffs.size > N + 1:
        raise InvalidParameterError(f"Profile degree {u.degree} exceeds truncation N={N}")
    out = np.zeros(N + 1)
    out[:coeffs.size] = coeffs
    return out


def _product_matrix(u: np.ndarray) -> np.ndarray:
    """T with (u·v)_k = Σ_j T[k, j] v_j for k, j = 0..N (degree-N truncation)"""
    N = u.size - 1
    ext = np.zeros(2 * N + 1)
    ext[:N + 1] = u
    k = np.arange(N + 1)[:, None]
    j = np.arange(N + 1)[None, :]
    lower = np.where(k >= j, ext[np.abs(k - j)], 0.0)
    upper = np.where((j >= k) & (k > 0), ext[np.abs(j - k)], 0.0)
    return 0.5 * (lower + ext[j + k] + upper)


def residual(u: CosineSeries, c: float, prob: GalerkinProblem) -> np.ndarray:
    """Modes 0..N of (c + L)u + u², the product taken to degree 2N then truncated"""
    coeffs = _padded(u, prob.N)
    square = _product_matrix(coeffs) @ coeffs
    return (c + prob.cfg.symbols(prob.N)) * coeffs + square


def jacobian(u: CosineSeries, c: float, prob: GalerkinProblem) -> np.ndarray:
    """
    (N+1) x (N+2) derivative of residual.

    Columns 0..N are the coefficients û_j (column 1 included), the last
    column is the velocity.
    """
    coeffs = _padded(u, prob.N)
    J = np.zeros((prob.N + 1, prob.N + 2))
    J[:, :-1] = 2.0 * _product_matrix(coeffs) + np.diag(c + prob.cfg.symbols(prob.N))
    J[:, -1] = coeffs
    return J


def finite_difference_jacobian(u: CosineSeries, c: float, prob: GalerkinProblem,
                               step: float = DEFAULT_SETTINGS.fd_step) -> np.ndarray:
    """Central differences of residual, column layout as in jacobian()"""
    coeffs = _padded(u, prob.N)
    J = np.zeros((prob.N + 1, prob.N + 2))
    for j in range(prob.N + 1):
        shift = np.zeros(prob.N + 1)
        shift[j] = step
        plus = residual(CosineSeries(coeffs + shift, F), c, prob)
        minus = residual(CosineSeries(coeffs - shift, F), c, prob)
        J[:, j] = (plus - minus) / (2 * step)
    u_f = CosineSeries(coeffs, F)
    J[:, -1] = (residual(u_f, c + step, prob) - residual(u_f, c - step, prob)) / (2 * step)
    return J


def _finish(coeffs: np.ndarray, c: float, prob: GalerkinProblem, iters: int) -> SolveResult:
    profile = CosineSeries(coeffs, F)
    r = plseries.continuous_residual(profile, c, prob.cfg)
    measured_b = float(profile.coefficient(prob.K)) if prob.K else 0.0
    return SolveResult(
        profile=profile, velocity=float(c), a=float(prob.a),
        residual_sup=sup_on_grid(r, 4 * prob.N), residual_l2=norms(r).l2,
        newton_iters=iters, N=prob.N, label=prob.label, measured_b=measured_b,
        K=prob.K, beta=float(prob.cfg.beta),
    )


def newton_solve(initial: Tuple[CosineSeries, float], prob: GalerkinProblem,
                 tol: Optional[float] = None, max_iters: Optional[int] = None,
                 settings: Settings = DEFAULT_SETTINGS, auto_double: bool = True) -> SolveResult:
    """Damped Newton with a halving line search on the residual 2-norm"""
    tol = settings.newton_tol if tol is None else tol
    max_iters = settings.newton_max_iters if max_iters is None else max_iters
    u0, c = initial
    c = float(c)

    if prob.a == 0:
        logger.info("a = 0: returning the trivial solution")
        return _finish(np.zeros(prob.N + 1), c, prob, 0)

    x = _padded(u0.truncate(min(u0.degree, prob.N)), prob.N)
    x[1] = prob.a
    keep = [j for j in range(prob.N + 2) if j != 1]

    F_vec = residual(CosineSeries(x, F), c, prob)
    norm = float(np.linalg.norm(F_vec))
    iters = 0
    # Σ|F_k| bounds the sup of the Galerkin residual on any grid
    while float(np.sum(np.abs(F_vec))) > tol:
        if iters >= max_iters:
            raise DivergedError(
                f"Newton did not reach {tol:g} in {max_iters} iterations (K={prob.K}, a={prob.a:g})",
                last_residual=norm,
                suggestions=["lower the amplitude", "raise --seed-order"],
            )
        J = jacobian(CosineSeries(x, F), c, prob)[:, keep]
        try:
            delta = np.linalg.solve(J, -F_vec)
        except np.linalg.LinAlgError as e:
            raise SingularSystemError(f"Newton Jacobian is singular at a={prob.a:g}: {e}")

        t = 1.0
        for _ in range(settings.newton_max_halvings + 1):
            x_try = x.copy()
            x_try[keep[:-1]] += t * delta[:-1]
            c_try = c + t * delta[-1]
            F_try = residual(CosineSeries(x_try, F), c_try, prob)
            norm_try = float(np.linalg.norm(F_try))
            if norm_try < norm:
                break
            t *= 0.5
        else:
            raise DivergedError(
                f"Line search found no decrease of |F|_2 = {norm:.3e} after "
                f"{settings.newton_max_halvings} halvings (K={prob.K}, a={prob.a:g})",
                last_residual=norm,
                suggestions=["lower the amplitude", "raise --seed-order"],
            )
        x, c, F_vec, norm = x_try, c_try, F_try, norm_try
        iters += 1
        logger.debug(f"newton iter {iters}: |F|_2 = {norm:.3e}, step {t:g}")

    result = _finish(x, c, prob, iters)
    tail = abs(x[-1])
    if tail > settings.spectral_tail_tol or result.residual_sup > tol:
        if auto_double:
            logger.warning(f"|û_N| = {tail:.2e}, residual {result.residual_sup:.2e} at N={prob.N}; "
                           f"doubling the truncation")
            wider = prob.with_truncation(2 * prob.N)
            return newton_solve((CosineSeries(x, F), c), wider, tol, max_iters, settings, auto_double=False)
        raise DivergedError(
            f"Truncation N={prob.N} does not resolve the wave (K={prob.K}, a={prob.a:g}): "
            f"|û_N| = {tail:.2e}, residual {result.residual_sup:.2e}",
            last_residual=result.residual_sup,
            suggestions=["raise --N", "lower the amplitude"],
        )

    logger.info(f"converged K={prob.K} {prob.label} a={prob.a:g}: c={c:.17g} "
                f"in {iters} iterations (residual {result.residual_sup:.2e})")
    return result


# ============================================================================
# DRIVERS
# ============================================================================

def _seed(series: plseries.PLSeries, a: float) -> Tuple[CosineSeries, float]:
    return plseries.evaluate(series, a)


def solve_wilton(K: int, branch, a: float, N: Optional[int] = None, seed_order: int = 2,
                 tol: Optional[float] = None, settings: Settings = DEFAULT_SETTINGS) -> SolveResult:
    constants = asymptotics.find_branch(K, branch)
    N = checked_truncation(K, N, settings)
    prob = GalerkinProblem(asymptotics.config(K), N, float(a), constants.label)
    series = plseries.expand(K, constants, seed_order, F, settings)
    return newton_solve(_seed(series, a), prob, tol=tol, settings=settings)


def continue_branch(K: int, branch, a_max: float, steps: int, N: Optional[int] = None,
                    seed_order: int = 2, tol: Optional[float] = None,
                    settings: Settings = DEFAULT_SETTINGS) -> BranchPath:
    """Natural-parameter continuation on a_i = i·a_max/steps"""
    if not math.isfinite(a_max) or a_max == 0:
        raise InvalidParameterError(f"Continuation needs a nonzero a_max, got {a_max}")
    if steps < 2:
        raise InvalidParameterError(f"Continuation needs at least 2 steps, got {steps}")

    constants = asymptotics.find_branch(K, branch)
    N = checked_truncation(K, N, settings)
    base = GalerkinProblem(asymptotics.config(K), N, 0.0, constants.label)
    series = plseries.expand(K, constants, seed_order, F, settings)

    results: List[SolveResult] = []
    records: List[StepRecord] = []
    prev: Optional[SolveResult] = None
    for i in range(1, steps + 1):
        target = i * a_max / steps
        a_cur = prev.a if prev else 0.0
        step = target - a_cur
        halvings = 0
        iters = 0
        state = prev
        while state is None or state.a != target:
            a_next = target if abs(target - a_cur) <= abs(step) else a_cur + step
            if state is None:
                guess = _seed(series, a_next)
            else:
                scaled = linear_combine([(a_next / state.a, state.profile)])
                guess = (scaled.with_coefficient(1, a_next), state.velocity)
            prob = base.with_amplitude(a_next).with_truncation(max(N, state.N if state else N))
            try:
                state = newton_solve(guess, prob, tol=tol, settings=settings)
            except (DivergedError, SingularSystemError) as e:
                halvings += 1
                if halvings > settings.continuation_max_halvings:
                    raise BranchLostError(
                        f"Lost K={K} branch {constants.label} at a={a_next:g}: {e.message}",
                        a=a_next,
                        suggestions=["increase --steps", "reduce --a-max"],
                    )
                step *= 0.5
                continue
            iters += state.newton_iters
            a_cur = a_next
        logger.info(f"continuation K={K} {constants.label}: a={target:g} c={state.velocity:.12g}")
        results.append(state)
        records.append(StepRecord(a=target, step=step, halvings=halvings, iters=iters))
        prev = state
    return BranchPath(K, constants.label, tuple(results), tuple(records))


def resonant_mode(beta: float, settings: Settings = DEFAULT_SETTINGS) -> Optional[int]:
    """K >= 2 with |beta - 1/(1+K²)| below the resonance tolerance, if any"""
    beta = float(beta)
    if not 0 < beta <= 0.2 + settings.resonance_tol:
        return None
    estimate = int(round(math.sqrt(1.0 / beta - 1.0)))
    for K in range(max(2, estimate - 1), estimate + 2):
        if abs(beta - 1.0 / (1 + K * K)) < settings.resonance_tol:
            return K
    return None


def stokes_solve(beta: float, a: float, N: Optional[int] = None, seed_order: int = 2,
                 tol: Optional[float] = None, settings: Settings = DEFAULT_SETTINGS) -> SolveResult:
    K = resonant_mode(beta, settings)
    if K is not None:
        raise ResonanceError(
            f"beta={beta} is resonant with K={K}; Stokes waves do not bifurcate there",
            suggestions=[f"use `solve --K {K}` for Wilton ripples"],
        )
    cfg = KawaharaConfig.stokes(float(beta))
    N = checked_truncation(None, N, settings)
    prob = GalerkinProblem(cfg, N, float(a), plseries.STOKES_LABEL)
    if a == 0:
        return newton_solve((CosineSeries([0.0], F), float(cfg.c0)), prob, settings=settings)
    series = plseries.expand_stokes(float(beta), seed_order, F, settings)
    return newton_solve(_seed(series, a), prob, tol=tol, settings=settings)


# ============================================================================
# COMPARISON
# ============================================================================

@dataclass(frozen=True)
class AsymptoticErrors:
    sup_error: float
    l2_error: float
    velocity_error: float


def compare_asymptotic(result: SolveResult, series: plseries.PLSeries) -> AsymptoticErrors:
    """Distance between a Newton solution and the truncated expansion at the same a"""
    if result.K != series.K or result.label != series.label:
        raise MismatchError(
            f"Solution (K={result.K}, {result.label}) and expansion "
            f"(K={series.K}, {series.label}) describe different branches")
    u, c = plseries.evaluate(series, result.a)
    diff = result.profile - u
    npoints = 4 * max(result.N, diff.degree)
    return AsymptoticErrors(
        sup_error=sup_on_grid(diff, npoints),
        l2_error=norms(diff).l2,
        velocity_error=abs(result.velocity - c),
    )


def recheck_residual(result: SolveResult, factor: int = 8) -> float:
    """Continuous residual sup on a factor·N grid"""
    r = plseries.continuous_residual(result.profile, result.velocity, result.cfg)
    return sup_on_grid(r, factor * result.N)
