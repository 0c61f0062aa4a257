import unittest

import numpy as np

from pgmvg.core_types import EmbeddingMatrix, normalize_rows
from pgmvg.exceptions import DegenerateCenter, DepthExceeded, TooFewActive
from pgmvg.knn import build_neighbor_table
from pgmvg.preprocess import (
    RemovalReport,
    apply_removal,
    find_high_degree_outliers,
    rank_similarity,
    statistic_adapt,
)


class TestStatisticAdapt(unittest.TestCase):
    def test_recenters_and_normalizes(self):
        rng = np.random.default_rng(0)
        data = rng.standard_normal((50, 6)) + 3.0
        m = statistic_adapt(normalize_rows(EmbeddingMatrix(data)))
        np.testing.assert_allclose(np.linalg.norm(m.data, axis=1), 1.0, atol=1e-12)
        # The offset dominated every row before; after recentering the mean is small
        self.assertLess(np.linalg.norm(m.data.mean(axis=0)), 0.5)

    def test_source_mean(self):
        data = np.array([[1.0, 0.0], [0.0, 1.0]])
        m = statistic_adapt(EmbeddingMatrix(data), source_mean=np.array([0.0, 0.0]))
        r = np.sqrt(0.5)
        np.testing.assert_allclose(m.data, [[r, -r], [-r, r]])
        with self.assertRaises(ValueError):
            statistic_adapt(EmbeddingMatrix(data), source_mean=np.zeros(3))

    def test_identical_rows(self):
        with self.assertRaises(DegenerateCenter):
            statistic_adapt(EmbeddingMatrix(np.ones((4, 3))))

    def test_single_row(self):
        with self.assertRaises(TooFewActive):
            statistic_adapt(EmbeddingMatrix(np.ones((1, 3))))


class TestHighDegreeFilter(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(3)
        spread = rng.standard_normal((30, 16))
        # Ten near-copies of one vector form a dense hub
        hub = np.ones(16) + 0.001 * rng.standard_normal((10, 16))
        self.data = normalize_rows(EmbeddingMatrix(np.vstack([spread, hub])))

    def test_hub_is_removed(self):
        t = build_neighbor_table(self.data, k_depth=5)
        report = find_high_degree_outliers([t], rank=5, threshold=0.9)
        np.testing.assert_array_equal(report.removed, np.arange(30, 40))
        self.assertEqual(report.per_model_counts, [10])
        self.assertEqual(report.reason, "HIGH_DEGREE")

    def test_union_over_models(self):
        t0 = build_neighbor_table(self.data, k_depth=5)
        other = EmbeddingMatrix(self.data.data[::-1], model_id=1)
        t1 = build_neighbor_table(other, k_depth=5)
        report = find_high_degree_outliers([t0, t1], rank=5, threshold=0.9)
        expected = np.concatenate([np.arange(10), np.arange(30, 40)])
        np.testing.assert_array_equal(report.removed, expected)
        self.assertEqual(len(report), 20)

    def test_union_ignores_model_order(self):
        t0 = build_neighbor_table(self.data, k_depth=5)
        other = EmbeddingMatrix(self.data.data[::-1], model_id=1)
        t1 = build_neighbor_table(other, k_depth=5)
        forward = find_high_degree_outliers([t0, t1], rank=5, threshold=0.9)
        backward = find_high_degree_outliers([t1, t0], rank=5, threshold=0.9)
        np.testing.assert_array_equal(forward.removed, backward.removed)
        self.assertEqual(forward.per_model_counts, backward.per_model_counts[::-1])

    def test_lower_threshold_flags_more(self):
        t = build_neighbor_table(self.data, k_depth=5)
        previous = set()
        for threshold in np.linspace(0.999, -0.9, 20):
            removed = set(find_high_degree_outliers([t], rank=5, threshold=threshold).removed)
            self.assertTrue(previous <= removed, threshold)
            previous = removed
        self.assertEqual(len(previous), 40)

    def test_rank_zero_disables(self):
        t = build_neighbor_table(self.data, k_depth=5)
        report = find_high_degree_outliers([t], rank=0, threshold=-0.99)
        self.assertEqual(len(report), 0)

    def test_rank_beyond_active_uses_last_neighbor(self):
        t = build_neighbor_table(self.data, k_depth=39)
        sim = rank_similarity(t, 500)
        np.testing.assert_allclose(sim, t.similarities[:, 38])

    def test_rank_beyond_depth(self):
        t = build_neighbor_table(self.data, k_depth=5)
        with self.assertRaises(DepthExceeded):
            rank_similarity(t, 10)

    def test_apply_removal(self):
        mask = np.ones(5, dtype=bool)
        out = apply_removal(mask, RemovalReport(np.array([3, 1, 3])))
        np.testing.assert_array_equal(out, [True, False, True, False, True])
        self.assertTrue(np.all(mask))
