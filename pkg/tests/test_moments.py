import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

import fmanova as fm
from fmanova.errors import GroupTooSmallError
from fmanova.moments import group_cov, group_mean, lambda_hat


def _dataset(arrays, n_points):
    groups = tuple(fm.Group(f"g{i}", a) for i, a in enumerate(arrays))
    return fm.FunctionalDataset(grid=fm.TimeGrid.uniform(n_points), groups=groups)


class TestGroupMean:
    def test_single_subject(self, rng):
        curve = rng.standard_normal((1, 2, 4))
        assert_array_equal(group_mean(curve), curve[0])

    def test_symmetric_pair_is_exactly_zero(self, rng):
        c = rng.standard_normal((2, 5))
        assert_array_equal(group_mean(np.stack([c, -c])), np.zeros_like(c))

    def test_matches_loop_oracle(self, rng):
        curves = rng.standard_normal((5, 2, 3))
        oracle = np.zeros((2, 3))
        for j in range(5):
            for v in range(2):
                for t in range(3):
                    oracle[v, t] += curves[j, v, t] / 5
        assert_allclose(group_mean(curves), oracle, atol=1e-14)

    def test_exact_permutation_invariance(self, rng):
        curves = rng.standard_normal((7, 3, 4))
        perm = rng.permutation(7)
        assert_array_equal(group_mean(curves), group_mean(curves[perm]))


class TestGroupCov:
    def test_identical_subjects_give_zero(self):
        curves = np.tile(np.arange(6.0).reshape(1, 2, 3), (4, 1, 1))
        assert_array_equal(group_cov(curves, 1, 1), np.zeros((2, 2)))

    def test_two_point_sample_variance(self):
        curves = np.array([[[0.0]], [[2.0]]])
        assert_allclose(group_cov(curves, 0, 0), [[2.0]])

    def test_matches_double_loop_oracle_and_psd(self, rng):
        curves = rng.standard_normal((6, 2, 4))
        mean = curves.mean(axis=0)
        ti = tj = 2
        oracle = np.zeros((2, 2))
        for j in range(6):
            d_i = curves[j, :, ti] - mean[:, ti]
            d_j = curves[j, :, tj] - mean[:, tj]
            oracle += np.outer(d_i, d_j) / 5
        got = group_cov(curves, ti, tj)
        assert_allclose(got, oracle, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(got)) >= -1e-12

    def test_transpose_symmetry_exact(self, rng):
        curves = rng.standard_normal((5, 3, 4))
        assert_array_equal(group_cov(curves, 1, 3), group_cov(curves, 3, 1).T)

    def test_translation_invariance(self, rng):
        curves = rng.standard_normal((5, 2, 4))
        shift = rng.standard_normal((1, 2, 4))
        assert_allclose(
            group_cov(curves + shift, 0, 2), group_cov(curves, 0, 2), atol=1e-12
        )

    def test_scaling_multiplies_entries(self, rng):
        ds = _dataset([rng.standard_normal((6, 2, 4))], 4)
        scale = np.exp(rng.standard_normal((2, 4)))
        scaled = fm.apply_scaling(ds, scale)
        t = 2
        expected = group_cov(ds.groups[0].curves, t, t) * np.outer(scale[:, t], scale[:, t])
        assert_allclose(group_cov(scaled.groups[0].curves, t, t), expected, rtol=1e-12)

    def test_needs_two_subjects(self):
        with pytest.raises(GroupTooSmallError):
            group_cov(np.zeros((1, 2, 3)), 0, 0)


class TestLambdaHat:
    def test_single_group_block_equals_cov(self, rng):
        curves = rng.standard_normal((5, 2, 3))
        est = lambda_hat(_dataset([curves], 3))
        for t in range(3):
            assert_allclose(est.lambda_blocks[0, t], group_cov(curves, t, t), atol=1e-12)

    def test_identical_groups_give_equal_blocks(self, rng):
        curves = rng.standard_normal((4, 2, 3))
        est = lambda_hat(_dataset([curves, curves.copy()], 3))
        assert_array_equal(est.lambda_blocks[0], est.lambda_blocks[1])

    def test_weights_match_hand_assembly(self, rng):
        a = rng.standard_normal((2, 1, 2))
        b = rng.standard_normal((4, 1, 2))
        est = lambda_hat(_dataset([a, b], 2))
        assert est.n_total == 6
        for t in range(2):
            assert_allclose(est.lambda_blocks[0, t], 3.0 * group_cov(a, t, t), rtol=1e-12)
            assert_allclose(est.lambda_blocks[1, t], 1.5 * group_cov(b, t, t), rtol=1e-12)

    def test_eta_hat_is_stacked_means(self, rng):
        a = rng.standard_normal((3, 2, 4))
        b = rng.standard_normal((5, 2, 4))
        est = lambda_hat(_dataset([a, b], 4))
        assert_array_equal(est.eta_hat[:2], group_mean(a))
        assert_array_equal(est.eta_hat[2:], group_mean(b))

    def test_blocks_are_psd(self, rng):
        est = lambda_hat(_dataset([rng.standard_normal((6, 3, 5))], 5))
        w = np.linalg.eigvalsh(est.lambda_blocks)
        trace = np.trace(est.lambda_blocks, axis1=2, axis2=3)
        assert np.all(w[..., 0] >= -1e-10 * trace)
