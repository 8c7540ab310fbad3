"""
Tests for the cosine-series ring and the Kawahara linear operator.
"""

import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trigpoly import (
    CosineSeries,
    KawaharaConfig,
    ScalarMode,
    apply_shifted_operator,
    basis,
    complement_projection,
    evaluate,
    invert_on_complement,
    linear_combine,
    multiply,
    norms,
    sup_on_grid,
    uniform_grid,
)
from wilton_errors import (
    InvalidParameterError,
    ModeMismatchError,
    NearResonanceError,
    NotInRangeError,
)

F = Fraction
FLOAT = ScalarMode.FLOAT


class TestCosineSeries:
    def test_mean_is_first_coefficient(self):
        f = CosineSeries([F(3), F(0), F(2)])
        assert f.coefficient(0) == 3
        assert f.coefficient(2) == 2
        assert f.coefficient(7) == 0
        assert evaluate(f, 0.0) == pytest.approx(5.0)
        assert evaluate(f, np.pi / 2) == pytest.approx(1.0)

    def test_equality_ignores_trailing_zeros(self):
        assert CosineSeries([F(1), F(0), F(0)]) == CosineSeries([F(1)])
        assert CosineSeries([1.0, 0.0], FLOAT) == CosineSeries([1.0], FLOAT)
        assert CosineSeries([F(1)]) != CosineSeries([1.0], FLOAT)

    def test_rational_mode_rejects_floats(self):
        with pytest.raises(ModeMismatchError):
            CosineSeries([0.5])
        with pytest.raises(ModeMismatchError):
            basis(1).with_coefficient(2, 0.25)

    def test_float_mode_rejects_non_finite(self):
        with pytest.raises(InvalidParameterError):
            CosineSeries([1.0, float("nan")], FLOAT)

    def test_float_coefficients_are_read_only(self):
        f = CosineSeries([1.0, 2.0], FLOAT)
        with pytest.raises(ValueError):
            f.coeffs[0] = 5.0

    def test_trimmed_drops_trailing_zeros(self):
        f = CosineSeries([F(1), F(0), F(2), F(0), F(0)])
        assert f.trimmed().degree == 2

    def test_rational_json_uses_fraction_strings(self):
        f = CosineSeries([F(-5, 8), F(0), F(0), F(-1, 8)])
        data = f.to_dict()
        assert data["coeffs"] == ["-5/8", "0/1", "0/1", "-1/8"]
        assert CosineSeries.from_json(f.to_json()) == f

    def test_json_degree_must_match(self):
        with pytest.raises(InvalidParameterError):
            CosineSeries.from_dict({"degree": 3, "mode": "rational", "coeffs": ["1/2"]})


class TestRingOperations:
    def test_cos_squared(self):
        assert multiply(basis(1), basis(1)) == CosineSeries([F(1, 2), F(0), F(1, 2)])

    def test_constant_is_multiplicative_identity(self):
        f = CosineSeries([F(2), F(-1), F(3, 7)])
        assert multiply(basis(0), f) == f
        assert multiply(f, basis(0)) == f

    def test_product_degree(self):
        f = basis(3)
        g = basis(5, scale=F(2))
        assert multiply(f, g).degree == 8
        assert multiply(f, g) == CosineSeries([F(0), F(0), F(1), F(0), F(0), F(0), F(0), F(0), F(1)])

    def test_float_product_matches_rational(self):
        f = CosineSeries([F(1, 3), F(-2), F(0), F(5, 4)])
        g = CosineSeries([F(0), F(7, 2), F(-1, 9)])
        exact = multiply(f, g).to_float().as_array()
        approx = multiply(f.to_float(), g.to_float()).as_array()
        np.testing.assert_allclose(approx, exact, rtol=0, atol=1e-15)

    def test_exact_product_is_commutative_and_associative(self):
        f = CosineSeries([F(1, 3), F(-2), F(0), F(5, 4)])
        g = CosineSeries([F(0), F(7, 2), F(-1, 9)])
        h = CosineSeries([F(2, 5), F(0), F(0), F(0), F(-3, 11)])
        assert multiply(f, g).padded(5) == multiply(g, f).padded(5)
        left = multiply(multiply(f, g), h)
        right = multiply(f, multiply(g, h))
        assert left.degree == right.degree == 9
        assert left.padded(9) == right.padded(9)

    def test_product_matches_quadrature_projection(self):
        rng = np.random.default_rng(7)
        f = CosineSeries(rng.normal(size=9), FLOAT)
        g = CosineSeries(rng.normal(size=6), FLOAT)
        h = multiply(f, g)
        npoints = 64
        x = uniform_grid(npoints)
        values = evaluate(f, x) * evaluate(g, x)
        for k in range(h.degree + 1):
            weight = 1.0 if k == 0 else 2.0
            projected = weight * float(np.sum(values * np.cos(k * x))) / npoints
            assert abs(projected - h.coefficient(k)) <= 1e-12

    def test_mixed_modes_raise(self):
        with pytest.raises(ModeMismatchError):
            linear_combine([(1, basis(1)), (1, basis(1, FLOAT))])
        with pytest.raises(ModeMismatchError):
            multiply(basis(1), basis(1, FLOAT))

    def test_operators(self):
        f = basis(1)
        g = basis(2, scale=F(3))
        assert (f + g) - g == f
        assert -f == basis(1, scale=F(-1))
        assert 2 * f == basis(1, scale=F(2))
        assert f * g == multiply(f, g)


class TestKawaharaOperator:
    def test_wilton_kernel(self):
        cfg = KawaharaConfig.wilton(2)
        assert cfg.beta == F(1, 5)
        assert cfg.c0 == F(4, 5)
        assert cfg.shifted(1) == 0
        assert cfg.shifted(2) == 0
        assert cfg.shifted(3) == 8
        assert cfg.shifted(4) == 36

    @pytest.mark.parametrize("K", range(2, 51))
    def test_only_kernel_modes_are_resonant(self, K):
        cfg = KawaharaConfig.wilton(K)
        zeros = [k for k in range(4 * K + 1) if cfg.shifted(k) == 0]
        assert zeros == [1, K]

    @pytest.mark.parametrize("K", [1, 0, -3, True, 2.0])
    def test_bad_K(self, K):
        with pytest.raises(InvalidParameterError):
            KawaharaConfig.wilton(K)

    def test_shifted_operator(self):
        cfg = KawaharaConfig.wilton(2)
        f = CosineSeries([F(1), F(1), F(1), F(1)])
        assert apply_shifted_operator(f, cfg.c0, cfg) == CosineSeries([F(4, 5), F(0), F(0), F(8)])

    def test_float_operator_matches_rational(self):
        cfg = KawaharaConfig.wilton(3)
        f = CosineSeries([F(1), F(2), F(-1), F(1, 3), F(4)])
        exact = apply_shifted_operator(f, F(1, 2), cfg).to_float().as_array()
        approx = apply_shifted_operator(f.to_float(), 0.5, cfg).as_array()
        np.testing.assert_allclose(approx, exact, rtol=1e-15)

    def test_rational_series_needs_rational_config(self):
        cfg = KawaharaConfig.wilton(2, FLOAT)
        with pytest.raises(ModeMismatchError):
            apply_shifted_operator(basis(3), 1, cfg)


class TestComplementInverse:
    def test_inverse_divides_by_symbol(self):
        cfg = KawaharaConfig.wilton(2)
        assert invert_on_complement(basis(3), cfg) == basis(3, scale=F(1, 8))

    def test_inverse_undoes_operator(self):
        cfg = KawaharaConfig.wilton(3)
        f = complement_projection(CosineSeries([F(1), F(2), F(-3), F(4), F(5, 2), F(1, 7)]), cfg)
        g = invert_on_complement(f, cfg)
        assert g.coefficient(1) == 0 and g.coefficient(3) == 0
        assert apply_shifted_operator(g, cfg.c0, cfg) == f

    @pytest.mark.parametrize("K", [2, 3, 5])
    def test_operator_then_inverse_is_identity(self, K):
        cfg = KawaharaConfig.wilton(K)
        g = complement_projection(CosineSeries([F(k * k - 3, k + 2) for k in range(4 * K + 1)]), cfg)
        assert invert_on_complement(apply_shifted_operator(g, cfg.c0, cfg), cfg) == g

    def test_kernel_modes_are_rejected(self):
        cfg = KawaharaConfig.wilton(2)
        with pytest.raises(NotInRangeError) as exc:
            invert_on_complement(basis(2), cfg)
        assert exc.value.details["modes"] == [2]

    def test_float_kernel_modes_use_relative_tolerance(self):
        cfg = KawaharaConfig.wilton(2, FLOAT)
        f = CosineSeries([1.0, 1e-16, 0.0, 1.0], FLOAT)
        assert invert_on_complement(f, cfg).coefficient(3) == pytest.approx(1 / 8)

    def test_resonant_stokes_setting(self):
        with pytest.raises(NearResonanceError) as exc:
            invert_on_complement(basis(2), KawaharaConfig.stokes(F(1, 5), ScalarMode.RATIONAL))
        assert exc.value.mode == 2
        with pytest.raises(NearResonanceError):
            invert_on_complement(basis(2, FLOAT), KawaharaConfig.stokes(0.2))


class TestNorms:
    def test_l2_of_basis_functions(self):
        assert norms(basis(0, FLOAT)).l2 == pytest.approx(np.sqrt(2 * np.pi))
        assert norms(basis(3, FLOAT)).l2 == pytest.approx(np.sqrt(np.pi))

    def test_sup(self):
        f = CosineSeries([1.0, -2.0], FLOAT)
        assert sup_on_grid(f) == pytest.approx(3.0)
        assert norms(f).sup == pytest.approx(3.0)
        assert norms(f).h4 == pytest.approx(np.sqrt(1 + 16 * 4))
