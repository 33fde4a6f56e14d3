import numpy as np
import pytest
from numpy.testing import assert_allclose

from fmanova.errors import DimensionMismatchError, EmptyInputError
from fmanova.numerics import empirical_quantile, kronecker, sym_pseudo_inverse, sym_rank


class TestSymPseudoInverse:
    def test_identity(self):
        assert_allclose(sym_pseudo_inverse(np.eye(3)), np.eye(3))

    def test_rank_deficient_diagonal(self):
        assert_allclose(sym_pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_penrose_conditions_random_psd(self, rng):
        a = rng.standard_normal((4, 6))
        m = a @ a.T
        pinv = sym_pseudo_inverse(m)
        assert_allclose(m @ pinv @ m, m, atol=1e-9)
        assert_allclose(pinv @ m @ pinv, pinv, atol=1e-9)
        assert_allclose((m @ pinv).T, m @ pinv, atol=1e-9)
        assert_allclose((pinv @ m).T, pinv @ m, atol=1e-9)

    def test_involution_on_full_rank(self, rng):
        a = rng.standard_normal((5, 5))
        m = a @ a.T + 5 * np.eye(5)
        assert_allclose(sym_pseudo_inverse(sym_pseudo_inverse(m)), m, rtol=1e-8)

    def test_indefinite_matrix_inverts_negative_eigenvalues(self):
        m = np.diag([3.0, -2.0])
        assert_allclose(sym_pseudo_inverse(m), np.diag([1 / 3, -0.5]))

    def test_rejects_asymmetric(self):
        with pytest.raises(DimensionMismatchError):
            sym_pseudo_inverse(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_negative_rtol(self):
        with pytest.raises(DimensionMismatchError):
            sym_pseudo_inverse(np.eye(2), rtol=-1.0)


class TestKronecker:
    def test_identity_product(self):
        assert_allclose(kronecker(np.eye(2), np.eye(3)), np.eye(6))

    def test_contrast_expansion(self):
        out = kronecker(np.array([[1.0, -1.0]]), np.eye(2))
        assert_allclose(out, np.array([[1, 0, -1, 0], [0, 1, 0, -1]], dtype=float))

    def test_mixed_product_rule(self, rng):
        a, b, c, d = (rng.standard_normal((2, 2)) for _ in range(4))
        assert_allclose(
            kronecker(a, b) @ kronecker(c, d), kronecker(a @ c, b @ d), atol=1e-12
        )

    def test_rank_multiplicative_on_full_rank(self, rng):
        a = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        b = rng.standard_normal((2, 2)) + 3 * np.eye(2)
        prod = kronecker(a, b)
        assert sym_rank(prod @ prod.T) == sym_rank(a @ a.T) * sym_rank(b @ b.T)


class TestEmpiricalQuantile:
    def test_order_statistic_convention(self):
        assert empirical_quantile([1, 2, 3, 4, 5], 0.6) == 3.0

    def test_constant_values(self):
        for level in (0.01, 0.5, 1.0):
            assert empirical_quantile([7.0] * 9, level) == 7.0

    def test_matches_sort_oracle_on_normal_draws(self, rng):
        draws = rng.standard_normal(1000)
        value = empirical_quantile(draws, 0.95)
        oracle = np.sort(draws)[int(np.ceil(0.95 * 1000)) - 1]
        assert value == oracle
        assert abs(value - 1.645) < 0.15

    def test_min_and_max_levels(self, rng):
        draws = rng.standard_normal(37)
        assert empirical_quantile(draws, 1 / 37) == draws.min()
        assert empirical_quantile(draws, 1.0) == draws.max()

    def test_nondecreasing_in_level(self, rng):
        draws = rng.standard_normal(25)
        levels = np.linspace(0.01, 1.0, 57)
        values = [empirical_quantile(draws, lv) for lv in levels]
        assert all(v2 >= v1 for v1, v2 in zip(values, values[1:]))

    def test_grid_levels_hit_exact_order_statistics(self):
        # (1 - j/B) * B is not exact in floats; the index must still be B - j.
        values = np.arange(1.0, 4.0)
        assert empirical_quantile(values, 1 - 1 / 3) == 2.0

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            empirical_quantile([], 0.5)

    def test_bad_level(self):
        with pytest.raises(DimensionMismatchError):
            empirical_quantile([1.0], 0.0)
