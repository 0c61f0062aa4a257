import unittest

import numpy as np

from pgmvg.core_types import (
    EmbeddingMatrix,
    PseudoLabels,
    RunConfig,
    UtteranceSet,
    check_same_rows,
    normalize_rows,
    validate_config,
)
from pgmvg.exceptions import ConfigError, InvalidEmbeddings, ShapeMismatch, ZeroVectorRow


class TestEmbeddingMatrix(unittest.TestCase):
    def test_shape_checks(self):
        with self.assertRaises(InvalidEmbeddings):
            EmbeddingMatrix(np.zeros(4))
        with self.assertRaises(InvalidEmbeddings):
            EmbeddingMatrix(np.zeros((3, 1)))
        with self.assertRaises(InvalidEmbeddings):
            EmbeddingMatrix(np.array([[1.0, np.nan]]))

    def test_read_only(self):
        m = EmbeddingMatrix(np.ones((2, 3)))
        with self.assertRaises(ValueError):
            m.data[0, 0] = 5.0
        self.assertEqual(m.rows, 2)
        self.assertEqual(m.dim, 3)

    def test_check_same_rows(self):
        a = EmbeddingMatrix(np.ones((4, 3)))
        b = EmbeddingMatrix(np.ones((4, 8)), model_id=1)
        self.assertEqual(check_same_rows([a, b]), 4)
        with self.assertRaises(ShapeMismatch):
            check_same_rows([a, EmbeddingMatrix(np.ones((5, 3)))])
        with self.assertRaises(ShapeMismatch):
            check_same_rows([])


class TestNormalizeRows(unittest.TestCase):
    def test_unit_norm(self):
        rng = np.random.default_rng(0)
        m = normalize_rows(EmbeddingMatrix(rng.standard_normal((10, 5)), model_id=2))
        np.testing.assert_allclose(np.linalg.norm(m.data, axis=1), 1.0, atol=1e-12)
        self.assertEqual(m.model_id, 2)

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        once = normalize_rows(EmbeddingMatrix(rng.standard_normal((10, 5))))
        twice = normalize_rows(once)
        np.testing.assert_array_equal(once.data, twice.data)

    def test_zero_row(self):
        data = np.ones((3, 4))
        data[1] = 0.0
        with self.assertRaises(ZeroVectorRow) as cm:
            normalize_rows(EmbeddingMatrix(data))
        self.assertEqual(cm.exception.row, 1)


class TestPseudoLabels(unittest.TestCase):
    def test_from_components(self):
        labels = PseudoLabels.from_components(np.array([7, -1, 3, 7, 3, -1, 9]))
        np.testing.assert_array_equal(labels.label, [0, -1, 1, 0, 1, -1, 2])
        self.assertEqual(labels.num_classes, 3)
        self.assertAlmostEqual(labels.coverage, 5 / 7)

    def test_empty(self):
        labels = PseudoLabels.from_components(np.zeros(0))
        self.assertEqual(labels.num_classes, 0)
        self.assertEqual(labels.coverage, 0.0)


class TestUtteranceSet(unittest.TestCase):
    def test_mask_defaults_to_all_active(self):
        ids = UtteranceSet(("a", "b", "c"))
        self.assertTrue(np.all(ids.active_mask))
        masked = ids.with_mask([True, False, True])
        self.assertEqual(int(masked.active_mask.sum()), 2)

    def test_rejects_duplicates(self):
        with self.assertRaises(ValueError):
            UtteranceSet(("a", "a"))


class TestRunConfig(unittest.TestCase):
    def test_defaults_are_valid(self):
        config = RunConfig()
        self.assertIs(validate_config(config), config)
        self.assertEqual(config.k_init, 5)
        self.assertEqual(config.th_high, 0.4)
        self.assertEqual(config.th_low, 0.2)
        self.assertEqual(config.min_cluster_size, 10)
        self.assertEqual(config.outlier_rank, 500)
        self.assertEqual(config.outlier_threshold, 0.8)

    def test_violations_name_the_field(self):
        cases = [
            (dict(th_low=0.5, th_high=0.4), "th_low"),
            (dict(th_high=1.0), "th_high"),
            (dict(k_init=0), "k_init"),
            (dict(k_max=3), "k_max"),
            (dict(min_cluster_size=1), "min_cluster_size"),
            (dict(epsilon=-0.1), "epsilon"),
            (dict(stop_new_node_frac=0.0), "stop_new_node_frac"),
        ]
        for changes, field in cases:
            with self.assertRaises(ConfigError) as cm:
                validate_config(RunConfig().replace(**changes))
            self.assertEqual(cm.exception.field, field)

    def test_assessment_cap_is_optional(self):
        validate_config(RunConfig(assess_max_utterances=None))
        validate_config(RunConfig(assess_max_utterances=4))
        with self.assertRaises(ConfigError) as cm:
            validate_config(RunConfig(assess_max_utterances=3))
        self.assertEqual(cm.exception.field, "assess_max_utterances")
        lines = RunConfig(assess_max_utterances=None).to_lines()
        self.assertIn("assess_max_utterances = none", lines)

    def test_quorum_against_models(self):
        config = RunConfig(vote_quorum=3)
        validate_config(config)
        validate_config(config, num_models=3)
        with self.assertRaises(ConfigError):
            validate_config(config, num_models=2)

    def test_to_lines(self):
        lines = RunConfig().to_lines()
        self.assertEqual(len(lines), len(RunConfig.field_names()))
        self.assertIn("k_init = 5", lines)
        self.assertIn("vote_quorum = none", lines)
