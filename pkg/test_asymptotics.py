"""
Tests for the closed-form small-amplitude constants.
"""

import math
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import asymptotics
from trigpoly import CosineSeries, apply_shifted_operator, basis
from wilton_errors import InvalidParameterError

F = Fraction
ALL_K = [2, 3, 4, 5, 6]
TABLE_K = [2, 3, 4, 7, 12]
LARGE_K = range(4, 31)


class TestSecondOrderCorrections:
    def test_k2_table(self):
        table = asymptotics.second_order_corrections(2)
        assert table[(2, 0, 0)] == CosineSeries([F(-5, 8)])
        assert table[(1, 1, 0)] == basis(3, scale=F(-1, 8))
        assert table[(0, 2, 0)] == CosineSeries([F(-5, 8), F(0), F(0), F(0), F(-1, 72)])

    def test_k3_mean_and_cos2x(self):
        table = asymptotics.second_order_corrections(3)
        assert table[(2, 0, 0)] == CosineSeries([F(-5, 9), F(0), F(1, 3)])

    @pytest.mark.parametrize("K", TABLE_K)
    def test_table_solves_its_equation(self, K):
        cfg = asymptotics.config(K)
        table = asymptotics.second_order_corrections(K)
        for monomial, rhs in asymptotics.second_order_rhs(K).items():
            u = table[monomial]
            assert apply_shifted_operator(u, cfg.c0, cfg) == rhs
            assert u.coefficient(1) == 0 and u.coefficient(K) == 0

    @pytest.mark.parametrize("K", TABLE_K)
    def test_closed_form_matches_direct_inversion(self, K):
        closed = asymptotics.second_order_corrections(K)
        solved = asymptotics.solved_second_order_corrections(K)
        for monomial in asymptotics.SECOND_ORDER:
            assert closed[monomial] == solved[monomial]

    def test_velocity_terms_vanish(self):
        table = asymptotics.second_order_corrections(4)
        for monomial in [(1, 0, 1), (0, 1, 1), (0, 0, 2)]:
            assert table[monomial] == CosineSeries([F(0)])


class TestBifurcationCoefficients:
    @pytest.mark.parametrize("K", range(2, 31))
    def test_brute_force_matches_stored_table(self, K):
        derived = asymptotics.derive_bifurcation_coefficients(K)
        stored = asymptotics.closed_form_bifurcation_coefficients(K)
        assert derived.first == stored.first
        assert derived.second == stored.second

    def test_k2_ordered(self):
        coeffs = asymptotics.closed_form_bifurcation_coefficients(2)
        assert coeffs.ordered() == (F(1), F(1), F(-5, 4), F(-11, 8),
                                    F(1, 2), F(1), F(-11, 8), F(-91, 72))

    def test_k3_ordered(self):
        coeffs = asymptotics.closed_form_bifurcation_coefficients(3)
        assert coeffs.ordered() == (F(1), F(-7, 9), F(1), F(-34, 63),
                                    F(1), F(1, 3), F(-34, 63), F(-211, 189))

    def test_k4_closed_forms(self):
        assert asymptotics.v300(4) == F(-119, 144)
        assert asymptotics.v120(4) == asymptotics.w210(4) == F(-2533, 3024)

    def test_closed_forms_need_large_K(self):
        with pytest.raises(InvalidParameterError):
            asymptotics.v300(3)
        with pytest.raises(InvalidParameterError):
            asymptotics.determinant_closed_form(2)


class TestReducedSystem:
    def test_k3_cubic(self):
        assert asymptotics.k3_reduced_cubic() == (F(109, 189), F(1), F(-5, 21), F(-1, 3))

    def test_k3_constants(self):
        branches = asymptotics.branch_constants(3)
        assert [b.label for b in branches] == ["1", "2", "3"]
        expected_b = (-1.78374, -0.54488, 0.59468)
        expected_c = (4.27863, 1.48289, 0.37396)
        for branch, b, c in zip(branches, expected_b, expected_c):
            assert branch.b_tilde0 == pytest.approx(b, abs=1e-4)
            assert branch.c_tilde0 == pytest.approx(c, abs=1e-4)

    def test_printed_cubic_has_other_roots(self):
        printed = asymptotics._real_roots(asymptotics.PRINTED_K3_CUBIC)
        system = [b.b_tilde0 for b in asymptotics.branch_constants(3)]
        assert not all(any(abs(p - s) < 1e-4 for p in printed) for s in system)

    @pytest.mark.parametrize("K", ALL_K)
    def test_branches_solve_reduced_system(self, K):
        for branch in asymptotics.branch_constants(K):
            assert asymptotics.branch_residual(K, branch) <= 1e-12

    def test_k2_branches(self):
        plus, minus = asymptotics.branch_constants(2)
        assert (plus.b_tilde0, plus.c_tilde0) == (1, 1)
        assert (minus.b_tilde0, minus.c_tilde0) == (-1, -1)
        assert plus.kernel_amplitude == pytest.approx(1 / math.sqrt(2))
        assert plus.velocity_coefficient == pytest.approx(-1 / math.sqrt(2))
        assert plus.velocity_order == 1

    def test_k4_constants_are_exact(self):
        (branch,) = asymptotics.branch_constants(4)
        assert branch.label == "unique"
        assert branch.exact
        assert branch.b_tilde0 == 0
        assert branch.c_tilde0 == F(119, 144)
        assert branch.velocity_order == 2

    @pytest.mark.parametrize("K", LARGE_K)
    def test_velocity_constant_closed_form(self, K):
        (branch,) = asymptotics.branch_constants(K)
        K2 = K * K
        assert branch.c_tilde0 == F((K2 + 1) * (5 * K2 - 24), 6 * K2 * (K2 - 4))
        assert asymptotics.branch_residual(K, branch) == 0

    @pytest.mark.parametrize("K", LARGE_K)
    def test_side_roots_are_imaginary(self, K):
        K2 = K * K
        b2 = asymptotics.nontrivial_b_squared(K)
        assert b2 == F(-K2 * (4 * K2 - 61), 61 * K2 - 4)
        assert b2 < 0


class TestJacobians:
    def test_k2_determinants(self):
        assert asymptotics.jacobian_certificate(2, "plus") == pytest.approx(-math.sqrt(2))
        assert asymptotics.jacobian_certificate(2, "minus") == pytest.approx(math.sqrt(2))

    def test_k3_displayed_and_exact_are_nonsingular(self):
        for branch in asymptotics.branch_constants(3):
            assert asymptotics.jacobian_certificate(3, branch) != 0
            assert abs(asymptotics.jacobian_certificate(3, branch, form="exact")) > 0.5

    def test_k4_determinant(self):
        det = asymptotics.jacobian_certificate(4, "unique")
        assert det == F(17, 1512)
        assert det == asymptotics.determinant_closed_form(4)

    @pytest.mark.parametrize("K", LARGE_K)
    def test_displayed_determinant_has_closed_form(self, K):
        det = asymptotics.jacobian_certificate(K, "unique")
        assert det == asymptotics.determinant_closed_form(K)
        assert det > 0

    def test_unknown_form(self):
        with pytest.raises(InvalidParameterError):
            asymptotics.jacobian_matrix(4, "unique", form="sideways")


class TestBranchLookup:
    @pytest.mark.parametrize("alias", ["+", "plus", " PLUS "])
    def test_k2_aliases(self, alias):
        assert asymptotics.find_branch(2, alias).label == "plus"

    def test_unknown_branch_lists_choices(self):
        with pytest.raises(InvalidParameterError) as exc:
            asymptotics.find_branch(3, "7")
        assert "1, 2, 3" in exc.value.suggestions[0]

    def test_case_tags(self):
        assert [asymptotics.case_tag(K) for K in (2, 3, 4, 9)] == ["K=2", "K=3", "K>=4", "K>=4"]
