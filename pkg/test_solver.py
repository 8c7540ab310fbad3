"""
Tests for the Galerkin-Newton solver, continuation and Stokes waves.
"""

import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import asymptotics
import plseries
import solver
from settings import load_settings
from trigpoly import CosineSeries, KawaharaConfig, ScalarMode, multiply
from wilton_errors import (
    DivergedError,
    InvalidParameterError,
    MismatchError,
    ResonanceError,
)

FLOAT = ScalarMode.FLOAT


def problem(K=2, N=16, a=0.01, label="plus"):
    return solver.GalerkinProblem(asymptotics.config(K), N, a, label)


class TestGalerkinMap:
    def test_product_matrix_matches_truncated_product(self):
        rng = np.random.default_rng(3)
        u = rng.normal(size=9)
        v = rng.normal(size=9)
        T = solver._product_matrix(u)
        expected = multiply(CosineSeries(u, FLOAT), CosineSeries(v, FLOAT)).as_array()[:9]
        np.testing.assert_allclose(T @ v, expected, atol=1e-13)

    def test_residual_vanishes_at_trivial_state(self):
        prob = problem()
        F_vec = solver.residual(CosineSeries([0.0], FLOAT), 0.8, prob)
        assert F_vec.shape == (prob.N + 1,)
        assert np.all(F_vec == 0)

    @pytest.mark.parametrize("K,label", [(2, "plus"), (3, "2"), (4, "unique")])
    def test_jacobian_matches_finite_differences(self, K, label):
        prob = problem(K, 16, 0.05, label)
        series = plseries.expand(K, label, 2)
        u, c = plseries.evaluate(series, 0.05)
        J = solver.jacobian(u, c, prob)
        assert J.shape == (17, 18)
        np.testing.assert_allclose(J, solver.finite_difference_jacobian(u, c, prob), atol=1e-7)

    def test_truncation_must_hold_K(self):
        with pytest.raises(InvalidParameterError):
            problem(K=5, N=4, label="unique")

    def test_profile_degree_is_checked(self):
        prob = problem(N=4)
        with pytest.raises(InvalidParameterError):
            solver.residual(CosineSeries(np.ones(7), FLOAT), 0.8, prob)


class TestWiltonSolve:
    @pytest.mark.parametrize("K,label", [(2, "plus"), (2, "minus"), (3, "1"), (3, "3"), (5, "unique")])
    def test_converges_quickly(self, K, label):
        result = solver.solve_wilton(K, label, 0.01)
        assert result.residual_sup <= 1e-11
        assert result.newton_iters <= 10
        assert result.profile.coefficient(1) == 0.01
        assert result.N == solver.default_truncation(K)
        assert solver.recheck_residual(result) <= 1e-11

    def test_k2_kernel_amplitude_sign(self):
        plus = solver.solve_wilton(2, "+", 0.01)
        minus = solver.solve_wilton(2, "-", 0.01)
        assert plus.measured_b > 0 > minus.measured_b
        assert plus.measured_b == pytest.approx(0.01 / np.sqrt(2), rel=0.05)

    def test_zero_amplitude_is_trivial(self):
        result = solver.solve_wilton(3, "2", 0.0)
        assert result.newton_iters == 0
        assert np.all(result.profile.as_array() == 0)
        assert result.velocity == pytest.approx(0.9)

    @pytest.mark.parametrize("K,label", [(2, "plus"), (3, "1"), (3, "2"), (3, "3"), (4, "unique")])
    def test_profile_error_is_third_order(self, K, label):
        series = plseries.expand(K, label, 2)
        coarse = solver.compare_asymptotic(solver.solve_wilton(K, label, 0.01), series)
        fine = solver.compare_asymptotic(solver.solve_wilton(K, label, 0.005), series)
        assert 6.4 <= coarse.sup_error / fine.sup_error <= 20.0

    def test_first_order_profile_error_is_second_order(self):
        series = plseries.expand(2, "plus", 1)
        coarse = solver.compare_asymptotic(solver.solve_wilton(2, "plus", 0.01), series)
        fine = solver.compare_asymptotic(solver.solve_wilton(2, "plus", 0.005), series)
        assert 3.2 <= coarse.sup_error / fine.sup_error <= 5.0

    @pytest.mark.parametrize("K,label", [(3, "3"), (4, "unique")])
    def test_velocity_error_is_fourth_order(self, K, label):
        series = plseries.expand(K, label, 2)
        coarse = solver.compare_asymptotic(solver.solve_wilton(K, label, 0.01), series)
        fine = solver.compare_asymptotic(solver.solve_wilton(K, label, 0.005), series)
        assert 12.8 <= coarse.velocity_error / fine.velocity_error <= 20.0

    @pytest.mark.parametrize("K,label", [(3, "1"), (3, "2"), (3, "3"), (4, "unique")])
    def test_velocity_constant_from_finite_amplitude(self, K, label):
        amps = np.array([1e-2, 5e-3, 2.5e-3])
        c0 = float(asymptotics.config(K).c0)
        scaled = [(solver.solve_wilton(K, label, a).velocity - c0) / a ** 2 for a in amps]
        intercept = np.polyfit(amps ** 2, scaled, 1)[-1]
        expected = float(asymptotics.find_branch(K, label).c_tilde0)
        assert intercept == pytest.approx(expected, rel=0.01)

    def test_mismatched_comparison(self):
        result = solver.solve_wilton(2, "plus", 0.01)
        with pytest.raises(MismatchError):
            solver.compare_asymptotic(result, plseries.expand(2, "minus", 2))

    def test_iteration_cap(self):
        settings = load_settings(environ={}, newton_max_iters=1, newton_tol=1e-15)
        with pytest.raises(DivergedError) as exc:
            solver.solve_wilton(3, "1", 0.05, seed_order=1, settings=settings)
        assert exc.value.last_residual > 0

    def test_ascent_direction_is_rejected(self, monkeypatch):
        true_jacobian = solver.jacobian
        monkeypatch.setattr(solver, "jacobian", lambda u, c, prob: -true_jacobian(u, c, prob))
        with pytest.raises(DivergedError) as exc:
            solver.solve_wilton(3, "1", 0.05, seed_order=1)
        assert "no decrease" in exc.value.message
        assert exc.value.last_residual > 0

    def test_truncation_floor(self):
        with pytest.raises(InvalidParameterError) as exc:
            solver.solve_wilton(2, "plus", 0.01, N=16)
        assert "32" in exc.value.message
        with pytest.raises(InvalidParameterError):
            solver.stokes_solve(0.5, 0.01, N=8)
        assert solver.checked_truncation(9, None) == 36

    def test_poor_decay_doubles_truncation_once(self):
        settings = load_settings(environ={}, min_truncation=8, spectral_tail_tol=1e-16)
        result = solver.solve_wilton(2, "plus", 0.05, N=8, settings=settings)
        assert result.N == 16
        assert result.residual_sup <= 1e-12
        assert abs(result.profile.coefficient(16)) <= 1e-16

    def test_unresolved_truncation_is_reported(self):
        seed = plseries.evaluate(plseries.expand(2, "plus", 2), 0.3)
        with pytest.raises(DivergedError) as exc:
            solver.newton_solve(seed, problem(K=2, N=8, a=0.3), auto_double=False)
        assert exc.value.last_residual > 1e-12

    def test_to_dict(self):
        data = solver.solve_wilton(4, "unique", 0.01).to_dict()
        assert data["K"] == 4
        assert data["branch"] == "unique"
        assert data["profile"]["mode"] == "float"
        assert data["profile"]["degree"] == data["N"]


class TestContinuation:
    def test_sweep(self):
        path = solver.continue_branch(2, "plus", 0.04, 4)
        assert [r.a for r in path.results] == pytest.approx([0.01, 0.02, 0.03, 0.04])
        assert all(r.residual_sup <= 1e-11 for r in path.results)
        assert len(path.steps) == 4
        assert path.max_jump() < 0.05
        velocities = [r.velocity for r in path.results]
        assert velocities == sorted(velocities, reverse=True)

    def test_minus_branch_keeps_its_sign(self):
        path = solver.continue_branch(2, "minus", 0.02, 10)
        assert len(path.results) == 10
        assert all(r.measured_b < 0 for r in path.results)

    def test_k3_branches_stay_ordered(self):
        paths = [solver.continue_branch(3, label, 0.01, 4) for label in ("1", "2", "3")]
        for first, second, third in zip(*(p.results for p in paths)):
            assert first.velocity > second.velocity > third.velocity > 0.9
        for path in paths:
            b_tilde0 = asymptotics.find_branch(3, path.label).b_tilde0
            for r in path.results:
                assert r.measured_b / r.a == pytest.approx(b_tilde0, rel=0.2)

    def test_sweep_validates_arguments(self):
        with pytest.raises(InvalidParameterError):
            solver.continue_branch(2, "plus", 0.0, 4)
        with pytest.raises(InvalidParameterError):
            solver.continue_branch(2, "plus", 0.04, 1)


class TestStokes:
    @pytest.mark.parametrize("K", [2, 3, 4, 7])
    def test_resonant_betas(self, K):
        assert solver.resonant_mode(1.0 / (1 + K * K)) == K

    @pytest.mark.parametrize("beta", [0.5, 0.3, 0.15, 1.5, -0.2])
    def test_non_resonant_betas(self, beta):
        assert solver.resonant_mode(beta) is None

    def test_resonant_beta_is_refused(self):
        with pytest.raises(ResonanceError):
            solver.stokes_solve(Fraction(1, 5), 0.01)

    def test_stokes_at_half(self):
        result = solver.stokes_solve(Fraction(1, 2), 0.01)
        assert result.K is None
        assert result.label == plseries.STOKES_LABEL
        assert result.residual_sup <= 1e-11
        assert result.velocity == pytest.approx(0.5 + 19 / 9 * 1e-4, abs=1e-7)
        assert result.cfg == KawaharaConfig.stokes(0.5)

    def test_stokes_zero_amplitude(self):
        result = solver.stokes_solve(0.5, 0.0)
        assert result.velocity == 0.5
        assert np.all(result.profile.as_array() == 0)
