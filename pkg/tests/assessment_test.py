import itertools
import unittest

import numpy as np
from scipy.integrate import trapezoid

from pgmvg.assessment.double_gaussian import GaussianPairFit, fit_double_gaussian
from pgmvg.assessment.merge_decision import (
    CaseTag,
    MergeDecision,
    Verdict,
    assess_subclasses,
    collect_scores,
    combine_decisions,
    decide_merge,
    pairwise_merge_closure,
    subsample_subclasses,
)
from pgmvg.core_types import EmbeddingMatrix, RunConfig, normalize_rows
from pgmvg.exceptions import TooFewScores, TooFewUtterances


def make_fit(mu1, mu2, sigma1, sigma2, w1):
    return GaussianPairFit(mu1=mu1, mu2=mu2, sigma1=sigma1, sigma2=sigma2, w1=w1, w2=1.0 - w1)


class TestDoubleGaussian(unittest.TestCase):
    def test_recovers_mixture(self):
        rng = np.random.default_rng(0)
        scores = np.concatenate([rng.normal(0.6, 0.05, 600), rng.normal(0.1, 0.1, 1400)])
        fit = fit_double_gaussian(scores)
        self.assertAlmostEqual(fit.mu1, 0.6, delta=0.02)
        self.assertAlmostEqual(fit.mu2, 0.1, delta=0.02)
        self.assertAlmostEqual(fit.sigma1, 0.05, delta=0.01)
        self.assertAlmostEqual(fit.w1, 0.3, delta=0.03)
        self.assertAlmostEqual(fit.w1 + fit.w2, 1.0)

    def test_log_likelihood_never_decreases(self):
        rng = np.random.default_rng(1)
        scores = np.concatenate([rng.normal(0.5, 0.1, 300), rng.normal(0.2, 0.1, 300)])
        trace = np.array(fit_double_gaussian(scores).log_likelihood_trace)
        self.assertGreater(trace.size, 1)
        self.assertTrue(np.all(np.diff(trace) >= -1e-8))

    def test_order_invariant(self):
        rng = np.random.default_rng(2)
        scores = rng.normal(0.3, 0.2, 500)
        self.assertEqual(fit_double_gaussian(scores), fit_double_gaussian(rng.permutation(scores)))

    def test_components_ordered(self):
        rng = np.random.default_rng(3)
        fit = fit_double_gaussian(rng.uniform(-1, 1, 200))
        self.assertGreaterEqual(fit.mu1, fit.mu2)

    def test_constant_scores(self):
        fit = fit_double_gaussian(np.full(10, 0.7))
        self.assertAlmostEqual(fit.mu1, 0.7)
        self.assertAlmostEqual(fit.mu2, 0.7)
        self.assertGreaterEqual(fit.sigma2, 1e-4)
        self.assertTrue(np.isfinite(fit.log_likelihood))

    def test_too_few_scores(self):
        with self.assertRaises(TooFewScores):
            fit_double_gaussian([0.1, 0.2, 0.3])

    def test_pdf_integrates_to_one(self):
        fit = make_fit(0.6, 0.1, 0.05, 0.1, 0.3)
        x = np.linspace(-1.0, 2.0, 30001)
        self.assertAlmostEqual(trapezoid(fit.pdf(x), x), 1.0, places=4)


class TestDecideMerge(unittest.TestCase):
    def test_cases_in_order(self):
        cases = [
            (make_fit(0.8, 0.5, 0.1, 0.1, 0.2), Verdict.MERGE, CaseTag.CASE1),
            (make_fit(0.8, 0.1, 0.1, 0.1, 0.6), Verdict.MERGE, CaseTag.CASE2),
            (make_fit(0.5, 0.35, 0.1, 0.1, 0.3), Verdict.MERGE, CaseTag.CASE3),
            (make_fit(0.7, 0.0, 0.05, 0.1, 0.3), Verdict.NO_MERGE, CaseTag.CASE4),
            # Overlapping but both low
            (make_fit(0.15, 0.1, 0.1, 0.1, 0.3), Verdict.NO_MERGE, CaseTag.CASE4),
        ]
        for fit, verdict, case_tag in cases:
            decision = decide_merge(fit, th_high=0.4, th_low=0.2, epsilon=0.05)
            self.assertEqual(decision.verdict, verdict)
            self.assertEqual(decision.case_tag, case_tag)

    def test_first_case_wins(self):
        # Satisfies CASE1 and CASE2 at once
        decision = decide_merge(make_fit(0.9, 0.5, 0.1, 0.1, 0.9), 0.4, 0.2, 0.05)
        self.assertEqual(decision.case_tag, CaseTag.CASE1)

    def test_monotone_in_mu2(self):
        for mu1 in (0.3, 0.5, 0.8):
            for sigma1, sigma2 in ((0.02, 0.02), (0.1, 0.05), (0.2, 0.2)):
                for w1 in (0.2, 0.45):
                    merged = False
                    for mu2 in np.linspace(-0.3, mu1, 61):
                        fit = make_fit(mu1, mu2, sigma1, sigma2, w1)
                        merge = decide_merge(fit, 0.4, 0.2, 0.05).merge
                        self.assertTrue(merge or not merged, (mu1, mu2, sigma1, sigma2, w1))
                        merged = merge

    def test_inconsistent_decision(self):
        with self.assertRaises(ValueError):
            MergeDecision(Verdict.MERGE, CaseTag.CASE4, make_fit(0.5, 0.1, 0.1, 0.1, 0.5))


class TestCombineDecisions(unittest.TestCase):
    def setUp(self):
        fit = make_fit(0.5, 0.1, 0.1, 0.1, 0.5)
        self.case1 = MergeDecision(Verdict.MERGE, CaseTag.CASE1, fit)
        self.case2 = MergeDecision(Verdict.MERGE, CaseTag.CASE2, fit)
        self.case4 = MergeDecision(Verdict.NO_MERGE, CaseTag.CASE4, fit)

    def test_majority(self):
        combined = combine_decisions([self.case2, self.case4, self.case1])
        self.assertEqual(combined.verdict, Verdict.MERGE)
        self.assertEqual(combined.case_tag, CaseTag.CASE1)
        self.assertEqual(len(combined.per_model), 3)

    def test_most_common_case(self):
        combined = combine_decisions([self.case1, self.case2, self.case2])
        self.assertEqual(combined.case_tag, CaseTag.CASE2)

    def test_even_split_is_no_merge(self):
        combined = combine_decisions([self.case1, self.case4])
        self.assertEqual(combined.verdict, Verdict.NO_MERGE)
        self.assertEqual(combined.case_tag, CaseTag.CASE4)

    def test_empty(self):
        with self.assertRaises(ValueError):
            combine_decisions([])


class TestScores(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(0)
        self.m = normalize_rows(EmbeddingMatrix(rng.standard_normal((10, 4))))

    def test_all_pairs(self):
        scores = collect_scores([np.array([4, 1]), np.array([7])], self.m)
        x = self.m.data
        expected = [x[1] @ x[4], x[1] @ x[7], x[4] @ x[7]]
        np.testing.assert_allclose(scores, expected)

    def test_errors(self):
        with self.assertRaises(ValueError):
            collect_scores([np.array([1, 2]), np.array([2, 3])], self.m)
        with self.assertRaises(TooFewUtterances):
            collect_scores([np.array([3])], self.m)

    def test_subsample_quotas(self):
        big, small, tiny = np.arange(100), np.arange(100, 120), np.arange(200, 203)
        out = subsample_subclasses([big, small], max_utterances=60, seed=0)
        self.assertEqual([s.size for s in out], [50, 20 * 60 // 120])
        self.assertTrue(set(out[0]) <= set(big))

        out = subsample_subclasses([big, tiny], max_utterances=60, seed=0)
        self.assertEqual(out[1].size, 2)

    def test_subsample_order_invariant(self):
        a, b = np.arange(0, 90), np.arange(90, 150)
        first = subsample_subclasses([a, b], max_utterances=40, seed=5)
        second = subsample_subclasses([b, a], max_utterances=40, seed=5)
        np.testing.assert_array_equal(first[0], second[1])
        np.testing.assert_array_equal(first[1], second[0])

    def test_uncapped_scores_use_every_pair(self):
        rng = np.random.default_rng(1)
        m = normalize_rows(EmbeddingMatrix(rng.standard_normal((300, 8))))
        subclasses = [np.arange(150), np.arange(150, 300)]

        uncapped = RunConfig(assess_max_utterances=None)
        scores = collect_scores(subclasses, m, max_utterances=uncapped.assess_max_utterances)
        self.assertEqual(scores.size, 300 * 299 // 2)

        capped = collect_scores(subclasses, m, max_utterances=RunConfig().assess_max_utterances)
        self.assertEqual(capped.size, 200 * 199 // 2)

    def test_no_subsample_under_cap(self):
        out = subsample_subclasses([np.array([3, 1]), np.array([2])], max_utterances=10)
        np.testing.assert_array_equal(out[0], [1, 3])


class TestAssessSubclasses(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(4)
        D = 32
        centers = np.eye(D)[:2]
        truth = np.repeat([0, 1], 20)
        self.models = [
            normalize_rows(
                EmbeddingMatrix(
                    centers[truth] + 0.3 / np.sqrt(D) * rng.standard_normal((40, D)), model_id=n
                )
            )
            for n in range(3)
        ]

    def test_same_speaker_merges(self):
        subclasses = [np.arange(0, 10), np.arange(10, 20)]
        decision = assess_subclasses(subclasses, self.models, RunConfig())
        self.assertTrue(decision.merge)
        self.assertEqual(decision.case_tag, CaseTag.CASE1)

    def test_different_speakers_stay_apart(self):
        subclasses = [np.arange(0, 20), np.arange(20, 40)]
        decision = assess_subclasses(subclasses, self.models, RunConfig())
        self.assertFalse(decision.merge)
        self.assertEqual(len(decision.per_model), 3)

    def test_model_order_does_not_change_verdict(self):
        for subclasses in (
            [np.arange(0, 10), np.arange(10, 20)],
            [np.arange(0, 20), np.arange(20, 40)],
            [np.arange(5, 25), np.arange(25, 35)],
        ):
            reference = assess_subclasses(subclasses, self.models, RunConfig())
            for order in itertools.permutations(range(3)):
                models = [self.models[n] for n in order]
                decision = assess_subclasses(subclasses, models, RunConfig())
                self.assertEqual(decision.verdict, reference.verdict)
                self.assertEqual(decision.case_tag, reference.case_tag)


class TestMergeClosure(unittest.TestCase):
    def test_transitive_groups(self):
        fit = make_fit(0.5, 0.1, 0.1, 0.1, 0.5)
        merges = {(1, 2), (2, 5)}

        def assess_pair(a, b):
            if (a, b) in merges:
                return MergeDecision(Verdict.MERGE, CaseTag.CASE1, fit)
            return MergeDecision(Verdict.NO_MERGE, CaseTag.CASE4, fit)

        groups, decisions = pairwise_merge_closure([5, 1, 9, 2], assess_pair)
        self.assertEqual(groups, [[1, 2, 5], [9]])
        self.assertEqual(len(decisions), 6)
        self.assertFalse(decisions[(1, 5)].merge)
