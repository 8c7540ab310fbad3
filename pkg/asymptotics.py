"""
Closed-form small-amplitude constants for Wilton ripples.

Covers the three resonance cases of u = a cos x + b cos Kx + u_r, c = c0 + c_r:

- second-order Taylor coefficients u^(i,j,k) of the kernel-orthogonal part u_r
- cubic-order coefficients of the two kernel projections (bifurcation equations)
- leading branch constants (b̃0, c̃0) with their reduced 2x2 Jacobians

Every stored table has a brute-force re-derivation built on trigpoly.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from trigpoly import (
    CosineSeries,
    KawaharaConfig,
    basis,
    complement_projection,
    invert_on_complement,
    linear_combine,
    multiply,
    zero_series,
)
from wilton_errors import DegenerateBranchError, InvalidParameterError

logger = logging.getLogger(__name__)

Monomial = Tuple[int, int, int]  # exponents of (a, b, c_r)

FIRST_ORDER = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
SECOND_ORDER = ((2, 0, 0), (1, 1, 0), (0, 2, 0), (1, 0, 1), (0, 1, 1), (0, 0, 2))

# coefficients of the printed one-variable K=3 cubic (highest power first);
# its roots disagree with the two-component system, kept for the comparison
PRINTED_K3_CUBIC = (Fraction(1), Fraction(1), Fraction(-5, 21), Fraction(-1, 3))

ROOT_BRACKET = (-10.0, 10.0)
ROOT_SAMPLES = 10_000
SINGULAR_DET = 1e-10


def config(K: int) -> KawaharaConfig:
    """Exact resonant configuration: beta = 1/(1+K²), c0 = K²/(1+K²)"""
    return KawaharaConfig.wilton(K)


def case_tag(K: int) -> str:
    config(K)
    if K == 2:
        return "K=2"
    if K == 3:
        return "K=3"
    return "K>=4"


# ============================================================================
# SECOND-ORDER CORRECTIONS
# ============================================================================

@dataclass(frozen=True)
class SecondOrderCorrections:
    """Taylor coefficients u^(i,j,k) of u_r for 1 <= i+j+k <= 2"""
    K: int
    terms: Dict[Monomial, CosineSeries]

    def __getitem__(self, monomial: Monomial) -> CosineSeries:
        return self.terms[monomial]

    def items(self):
        return self.terms.items()


def second_order_rhs(K: int) -> Dict[Monomial, CosineSeries]:
    """
    Right-hand sides of (c0 + L) u^(i,j,k) = RHS at second order.

    The a^i b^j part of -(a cos x + b cos Kx)², with kernel modes removed.
    Entries involving c_r vanish.
    """
    cfg = config(K)
    cos1, cosK = basis(1), basis(K)
    products = {
        (2, 0, 0): multiply(cos1, cos1),
        (1, 1, 0): linear_combine([(2, multiply(cos1, cosK))]),
        (0, 2, 0): multiply(cosK, cosK),
    }
    rhs = {}
    for monomial in SECOND_ORDER:
        if monomial in products:
            rhs[monomial] = -complement_projection(products[monomial], cfg)
        else:
            rhs[monomial] = zero_series()
    return rhs


def second_order_corrections(K: int) -> SecondOrderCorrections:
    """Closed-form u^(i,j,k); K=2 has its own formulas because cos 2x is a kernel mode there"""
    cfg = config(K)
    c0 = cfg.c0
    d = cfg.shifted
    half_mean = Fraction(-1) / (2 * c0)

    if K == 2:
        u200 = CosineSeries([half_mean])
        u110 = basis(3, scale=Fraction(-1) / d(3))
        u020 = linear_combine([(1, CosineSeries([half_mean])),
                               (1, basis(4, scale=Fraction(-1) / (2 * d(4))))])
    else:
        u200 = linear_combine([(1, CosineSeries([half_mean])),
                               (1, basis(2, scale=Fraction(-1) / (2 * d(2))))])
        u110 = linear_combine([(1, basis(K - 1, scale=Fraction(-1) / d(K - 1))),
                               (1, basis(K + 1, scale=Fraction(-1) / d(K + 1)))])
        u020 = linear_combine([(1, CosineSeries([half_mean])),
                               (1, basis(2 * K, scale=Fraction(-1) / (2 * d(2 * K))))])

    terms = {m: zero_series() for m in FIRST_ORDER + SECOND_ORDER}
    terms[(2, 0, 0)] = u200
    terms[(1, 1, 0)] = u110
    terms[(0, 2, 0)] = u020
    return SecondOrderCorrections(K=K, terms=terms)


def solved_second_order_corrections(K: int) -> SecondOrderCorrections:
    """Same table obtained by inverting second_order_rhs directly"""
    cfg = config(K)
    terms = {m: zero_series() for m in FIRST_ORDER}
    for monomial, rhs in second_order_rhs(K).items():
        terms[monomial] = invert_on_complement(rhs, cfg)
    return SecondOrderCorrections(K=K, terms=terms)


# ============================================================================
# BIFURCATION COEFFICIENTS
# ============================================================================

# display order of the cubic-order coefficients per case
ORDERED_MONOMIALS = {
    "K=2": (((1, 1, 0), (1, 0, 1), (3, 0, 0), (1, 2, 0)),
            ((2, 0, 0), (0, 1, 1), (2, 1, 0), (0, 3, 0))),
    "K=3": (((1, 0, 1), (3, 0, 0), (2, 1, 0), (1, 2, 0)),
            ((0, 1, 1), (3, 0, 0), (2, 1, 0), (0, 3, 0))),
    "K>=4": (((1, 0, 1), (3, 0, 0), (1, 2, 0)),
             ((0, 1, 1), (2, 1, 0), (0, 3, 0))),
}


@dataclass(frozen=True)
class BifurcationCoefficients:
    """Cubic-and-lower coefficients of the cos x and cos Kx projections"""
    K: int
    case: str
    first: Dict[Monomial, Fraction]
    second: Dict[Monomial, Fraction]

    def coefficient(self, component: int, monomial: Monomial) -> Fraction:
        table = self.first if component == 1 else self.second
        return table.get(monomial, Fraction(0))

    def ordered(self) -> Tuple[Fraction, ...]:
        first_keys, second_keys = ORDERED_MONOMIALS[self.case]
        return (tuple(self.coefficient(1, m) for m in first_keys)
                + tuple(self.coefficient(2, m) for m in second_keys))

    @property
    def v300(self) -> Fraction:
        return self.coefficient(1, (3, 0, 0))

    @property
    def v120(self) -> Fraction:
        return self.coefficient(1, (1, 2, 0))

    @property
    def w210(self) -> Fraction:
        return self.coefficient(2, (2, 1, 0))

    @property
    def w030(self) -> Fraction:
        return self.coefficient(2, (0, 3, 0))


Polynomial = Dict[Monomial, CosineSeries]


def _poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    out: Polynomial = {}
    for mp, sp in p.items():
        for mq, sq in q.items():
            key = (mp[0] + mq[0], mp[1] + mq[1], mp[2] + mq[2])
            product = multiply(sp, sq)
            out[key] = out[key] + product if key in out else product
    return out


def _poly_add(*polys: Polynomial, scales: Optional[Sequence[int]] = None) -> Polynomial:
    scales = scales or [1] * len(polys)
    out: Polynomial = {}
    for scale, poly in zip(scales, polys):
        for key, series in poly.items():
            term = linear_combine([(scale, series)])
            out[key] = out[key] + term if key in out else term
    return out


def derive_bifurcation_coefficients(K: int) -> BifurcationCoefficients:
    """
    Brute-force the cubic expansion of both kernel projections.

    Forms c_r u0 + u0² + 2 u0 (a² u200 + ab u110 + b² u020) monomial by
    monomial over exact rationals and reads off the cos x and cos Kx entries.
    """
    corrections = solved_second_order_corrections(K)
    u0 = {(1, 0, 0): basis(1), (0, 1, 0): basis(K)}
    ur2 = {m: corrections[m] for m in ((2, 0, 0), (1, 1, 0), (0, 2, 0))}
    shift = {(0, 0, 1): basis(0)}

    forcing = _poly_add(_poly_mul(shift, u0), _poly_mul(u0, u0), _poly_mul(u0, ur2),
                        scales=[1, 1, 2])
    first = {}
    second = {}
    for monomial, series in sorted(forcing.items()):
        if series.coefficient(1) != 0:
            first[monomial] = series.coefficient(1)
        if series.coefficient(K) != 0:
            second[monomial] = series.coefficient(K)
    logger.debug(f"K={K}: derived {len(first)} + {len(second)} bifurcation coefficients")
    return BifurcationCoefficients(K=K, case=case_tag(K), first=first, second=second)


def v300(K: int) -> Fraction:
    _require_large_K(K)
    K2 = K * K
    return Fraction(-(K2 + 1) * (5 * K2 - 24), 6 * K2 * (K2 - 4))


def v120(K: int) -> Fraction:
    _require_large_K(K)
    K2 = K * K
    return Fraction(-(K2 + 1) * (4 * K2 * K2 - 27 * K2 + 4), K2 * (K2 - 4) * (4 * K2 - 1))


def w210(K: int) -> Fraction:
    return v120(K)


def w030(K: int) -> Fraction:
    _require_large_K(K)
    K2 = K * K
    return Fraction(-(K2 + 1) * (24 * K2 - 5), 6 * K2 * (4 * K2 - 1))


def _require_large_K(K: int):
    config(K)
    if K < 4:
        raise InvalidParameterError(f"The v/w closed forms hold for K >= 4, got K={K}")


def closed_form_bifurcation_coefficients(K: int) -> BifurcationCoefficients:
    case = case_tag(K)
    F = Fraction
    if case == "K=2":
        first = {(1, 1, 0): F(1), (1, 0, 1): F(1), (3, 0, 0): F(-5, 4), (1, 2, 0): F(-11, 8)}
        second = {(2, 0, 0): F(1, 2), (0, 1, 1): F(1), (2, 1, 0): F(-11, 8), (0, 3, 0): F(-91, 72)}
    elif case == "K=3":
        first = {(1, 0, 1): F(1), (3, 0, 0): F(-7, 9), (2, 1, 0): F(1), (1, 2, 0): F(-34, 63)}
        second = {(0, 1, 1): F(1), (3, 0, 0): F(1, 3), (2, 1, 0): F(-34, 63), (0, 3, 0): F(-211, 189)}
    else:
        first = {(1, 0, 1): F(1), (3, 0, 0): v300(K), (1, 2, 0): v120(K)}
        second = {(0, 1, 1): F(1), (2, 1, 0): w210(K), (0, 3, 0): w030(K)}
    return BifurcationCoefficients(K=K, case=case, first=first, second=second)


# ============================================================================
# REDUCED SYSTEM AT a = 0
# ============================================================================

def _scalings(K: int):
    """(b = sb·b̃·a^p, c_r = sc·c̃·a^q) factors and the kept monomial filter"""
    if K == 2:
        s = 1.0 / math.sqrt(2.0)
        return s, -s, lambda m: m[0] + m[1] + m[2] == 2
    return 1, 1, lambda m: m[0] + m[1] + 2 * m[2] == 3


def reduced_system(K: int, b_tilde, c_tilde) -> Tuple:
    """
    Leading-order rescaled bifurcation equations.

    K=2:  ((b̃ - c̃)/√2, (1 - b̃c̃)/2)
    K>=3: cubic terms with b = a b̃, c_r = a² c̃, divided by a³
    """
    coeffs = closed_form_bifurcation_coefficients(K)
    sb, sc, keep = _scalings(K)
    b = sb * b_tilde
    c = sc * c_tilde
    values = []
    for table in (coeffs.first, coeffs.second):
        values.append(sum((coef * b ** m[1] * c ** m[2] for m, coef in table.items() if keep(m)),
                          Fraction(0) if K != 2 else 0.0))
    return tuple(values)


def reduced_jacobian(K: int, b_tilde, c_tilde) -> List[List]:
    """Analytic derivative of reduced_system with respect to (b̃, c̃)"""
    coeffs = closed_form_bifurcation_coefficients(K)
    sb, sc, keep = _scalings(K)
    b = sb * b_tilde
    c = sc * c_tilde
    zero = Fraction(0) if K != 2 else 0.0
    rows = []
    for table in (coeffs.first, coeffs.second):
        db = dc = zero
        for m, coef in table.items():
            if not keep(m):
                continue
            _, j, k = m
            if j:
                db += coef * j * b ** (j - 1) * sb * c ** k
            if k:
                dc += coef * k * b ** j * c ** (k - 1) * sc
        rows.append([db, dc])
    return rows


def k3_reduced_cubic() -> Tuple[Fraction, ...]:
    """
    Cubic in b̃ obtained by eliminating c̃ from the K=3 reduced system.

    c̃ = 7/9 - b̃ + (34/63) b̃² turns the second equation into
    (109/189) b̃³ + b̃² - (5/21) b̃ - 1/3 = 0.
    """
    coeffs = closed_form_bifurcation_coefficients(3)
    # first:  c̃ + p0 + p1 b̃ + p2 b̃²   second: q0 + q1 b̃ + b̃c̃ + q3 b̃³
    p0 = coeffs.coefficient(1, (3, 0, 0))
    p1 = coeffs.coefficient(1, (2, 1, 0))
    p2 = coeffs.coefficient(1, (1, 2, 0))
    q0 = coeffs.coefficient(2, (3, 0, 0))
    q1 = coeffs.coefficient(2, (2, 1, 0))
    q3 = coeffs.coefficient(2, (0, 3, 0))
    # b̃c̃ = -p0 b̃ - p1 b̃² - p2 b̃³
    cubic = (q3 - p2, -p1, q1 - p0, q0)
    lead = -1 if cubic[1] < 0 else 1
    return tuple(lead * x for x in cubic)


def _real_roots(coeffs: Sequence[Fraction]) -> List[float]:
    """Bracket sign changes on a grid, bisect to 1e-8, then Newton-polish to 1e-14"""
    poly = np.array([float(x) for x in coeffs])
    deriv = np.polyder(poly)
    grid = np.linspace(ROOT_BRACKET[0], ROOT_BRACKET[1], ROOT_SAMPLES + 1)
    values = np.polyval(poly, grid)

    roots = []
    for i in range(ROOT_SAMPLES):
        lo, hi = grid[i], grid[i + 1]
        f_lo, f_hi = values[i], values[i + 1]
        if f_lo == 0.0:
            roots.append(float(lo))
            continue
        if f_lo * f_hi > 0:
            continue
        while hi - lo > 1e-8:
            mid = 0.5 * (lo + hi)
            f_mid = np.polyval(poly, mid)
            if f_lo * f_mid <= 0:
                hi = mid
            else:
                lo, f_lo = mid, f_mid
        x = 0.5 * (lo + hi)
        for _ in range(50):
            step = np.polyval(poly, x) / np.polyval(deriv, x)
            x -= step
            if abs(step) < 1e-14:
                break
        roots.append(float(x))
    return sorted(roots)


def nontrivial_b_squared(K: int) -> Fraction:
    """b̃² of the non-zero cubic roots at K >= 4; negative, so those roots are imaginary"""
    return (v300(K) - w210(K)) / (w030(K) - v120(K))


# ============================================================================
# BRANCH CONSTANTS
# ============================================================================

K2_LABELS = {"plus": "plus", "+": "plus", "minus": "minus", "-": "minus"}


@dataclass(frozen=True)
class BranchConstants:
    """Leading constants of one small-amplitude branch"""
    K: int
    label: str
    b_tilde0: Union[Fraction, float]
    c_tilde0: Union[Fraction, float]
    b_scaling: str
    c_scaling: str
    exact: bool = False

    @property
    def kernel_amplitude(self) -> Union[Fraction, float]:
        """Coefficient b1 of cos Kx in the order-a term when û1 = a"""
        if self.K == 2:
            return self.b_tilde0 / math.sqrt(2.0)
        return self.b_tilde0

    @property
    def velocity_order(self) -> int:
        return 1 if self.K == 2 else 2

    @property
    def velocity_coefficient(self) -> Union[Fraction, float]:
        """Leading c_n with c = c0 + c_n a^n + ..."""
        if self.K == 2:
            return -self.c_tilde0 / math.sqrt(2.0)
        return self.c_tilde0


def branch_constants(K: int) -> List[BranchConstants]:
    case = case_tag(K)
    if case == "K=2":
        scaling = ("b = (a/√2) b̃(a)", "c_r = -(a/√2) c̃_r(a)")
        return [BranchConstants(2, "plus", Fraction(1), Fraction(1), *scaling),
                BranchConstants(2, "minus", Fraction(-1), Fraction(-1), *scaling)]

    scaling = ("b = a b̃(a)", "c_r = a² c̃_r(a)")
    if case == "K=3":
        branches = []
        for sigma, b in enumerate(_real_roots(k3_reduced_cubic()), start=1):
            c = 7 / 9 - b + (34 / 63) * b * b
            branches.append(BranchConstants(3, str(sigma), b, c, *scaling))
        if len(branches) != 3:
            raise DegenerateBranchError(f"Expected three real K=3 roots, found {len(branches)}")
        return branches

    return [BranchConstants(K, "unique", Fraction(0), -v300(K), *scaling, exact=True)]


def branch_labels(K: int) -> List[str]:
    return [b.label for b in branch_constants(K)]


def find_branch(K: int, label) -> BranchConstants:
    """Look up a branch by label; K=2 also accepts '+' and '-'"""
    if isinstance(label, BranchConstants):
        return label
    key = str(label).strip().lower()
    if K == 2:
        key = K2_LABELS.get(key, key)
    for branch in branch_constants(K):
        if branch.label == key:
            return branch
    raise InvalidParameterError(
        f"Unknown branch {label!r} for K={K}",
        suggestions=[f"choose one of: {', '.join(branch_labels(K))}"],
    )


def branch_residual(K: int, branch) -> float:
    """Largest component of the reduced system at the branch point"""
    b = find_branch(K, branch)
    return max(abs(float(v)) for v in reduced_system(K, b.b_tilde0, b.c_tilde0))


def jacobian_matrix(K: int, branch, form: str = "displayed") -> List[List]:
    """
    Reduced Jacobian at a branch point.

    "displayed" reproduces the published matrices (the K=2 second row is
    (∓1, ∓1) and K=3 uses [[1, 1], [-34/63, b̃0]]); "exact" is reduced_jacobian.
    """
    b = find_branch(K, branch)
    if form == "exact":
        return reduced_jacobian(K, b.b_tilde0, b.c_tilde0)
    if form != "displayed":
        raise InvalidParameterError(f"Unknown Jacobian form {form!r}", suggestions=["use displayed or exact"])
    if K == 2:
        s = 1.0 / math.sqrt(2.0)
        sign = float(b.b_tilde0)
        return [[s, -s], [-sign, -sign]]
    if K == 3:
        return [[1.0, 1.0], [-34 / 63, b.b_tilde0]]
    return [[Fraction(0), Fraction(1)], [w210(K) - v300(K), Fraction(0)]]


def jacobian_certificate(K: int, branch, form: str = "displayed"):
    """Determinant of the reduced Jacobian; singular matrices raise"""
    (p, q), (r, s) = jacobian_matrix(K, branch, form)
    det = p * s - q * r
    if abs(float(det)) < SINGULAR_DET:
        raise DegenerateBranchError(f"Reduced Jacobian is singular at K={K}, branch {branch}: det={det}")
    return det


def determinant_closed_form(K: int) -> Fraction:
    """(K²+1)(4K²-61) / (6(K²-4)(4K²-1))"""
    _require_large_K(K)
    K2 = K * K
    return Fraction((K2 + 1) * (4 * K2 - 61), 6 * (K2 - 4) * (4 * K2 - 1))
