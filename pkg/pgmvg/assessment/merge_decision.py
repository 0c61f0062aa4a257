# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Double-Gaussian merge assessment of candidate sub-classes.

For each model, the cosine scores of all utterance pairs in the union of the
sub-classes are fitted with a two-component mixture, and the ordered rules
decide:

    CASE1  mu2 > th_high                                   -> merge
    CASE2  w1 > 0.5                                        -> merge
    CASE3  mu1 - sigma1 < mu2 + sigma2 + epsilon and
           mu1 > th_low                                    -> merge
    CASE4  otherwise                                       -> do not merge

The per-model verdicts are combined by strict majority.
"""

import enum
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core_types import EmbeddingMatrix, RunConfig
from ..exceptions import TooFewUtterances
from ..graph.union_find import UnionFind
from .double_gaussian import GaussianPairFit, fit_double_gaussian

logger = logging.getLogger(__name__)


class Verdict(str, enum.Enum):
    MERGE = "MERGE"
    NO_MERGE = "NO_MERGE"


class CaseTag(str, enum.Enum):
    CASE1 = "CASE1"
    CASE2 = "CASE2"
    CASE3 = "CASE3"
    CASE4 = "CASE4"


@dataclass(frozen=True)
class MergeDecision:
    """Verdict of one assessment.

    For a combined decision, ``fit`` is the fit of the first model that
    voted with the majority under the reported case, and ``per_model``
    holds every model's own decision in model order.
    """

    verdict: Verdict
    case_tag: CaseTag
    fit: GaussianPairFit
    per_model: Tuple["MergeDecision", ...] = ()

    def __post_init__(self):
        if (self.verdict == Verdict.MERGE) == (self.case_tag == CaseTag.CASE4):
            raise ValueError("Case %s contradicts verdict %s" % (self.case_tag, self.verdict))

    @property
    def merge(self) -> bool:
        return self.verdict == Verdict.MERGE


def subsample_subclasses(
    subclasses: Sequence[np.ndarray], max_utterances: Optional[int], seed: int = 0
) -> List[np.ndarray]:
    """Shrink the sub-classes so their union has at most max_utterances.

    Each class keeps a share proportional to its size, and at least 2
    members. The generator is seeded from seed and the smallest member of
    every class, so the draw is the same whichever order the classes come
    in and however the work is scheduled.
    """
    subclasses = [np.sort(np.asarray(s, dtype=np.int64)) for s in subclasses]
    total = sum(s.size for s in subclasses)
    if max_utterances is None or total <= max_utterances:
        return subclasses

    anchors = [int(s[0]) for s in subclasses]
    order = np.argsort(anchors, kind="stable")
    rng = np.random.default_rng([int(seed)] + sorted(anchors))

    out: List[Optional[np.ndarray]] = [None] * len(subclasses)
    for c in order:
        members = subclasses[c]
        quota = int(np.floor(max_utterances * members.size / total))
        quota = min(max(quota, 2), members.size)
        out[c] = np.sort(rng.choice(members, size=quota, replace=False))
    return out


def collect_scores(
    subclasses: Sequence[np.ndarray],
    m: EmbeddingMatrix,
    max_utterances: Optional[int] = None,
    seed: int = 0,
) -> np.ndarray:
    """Cosine scores of every unordered pair in the union of subclasses.

    Args:
        subclasses (list[np.ndarray]): Disjoint utterance index sets
        m (EmbeddingMatrix): Normalized embeddings of one model
        max_utterances (int, optional): Subsample the union down to this
            size first (see subsample_subclasses). Defaults to None.
        seed (int, optional): Seed of the subsampling. Defaults to 0.

    Returns:
        np.ndarray: U (U - 1) / 2 scores for a union of U utterances,
            intra- and cross-subclass pairs alike.

    Raises:
        TooFewUtterances: If the union has fewer than 2 utterances.
    """
    subclasses = subsample_subclasses(subclasses, max_utterances, seed)
    union = np.concatenate([np.asarray(s, dtype=np.int64) for s in subclasses] or [[]])
    union = union.astype(np.int64)
    if np.unique(union).size != union.size:
        raise ValueError("Sub-classes must be disjoint")
    if union.size < 2:
        raise TooFewUtterances(int(union.size))

    x = np.asarray(m.data, dtype=np.float64)[np.sort(union)]
    rows, cols = np.triu_indices(union.size, k=1)
    return np.einsum("ij,ij->i", x[rows], x[cols])


def decide_merge(
    fit: GaussianPairFit, th_high: float, th_low: float, epsilon: float
) -> MergeDecision:
    """Apply the four ordered cases to one fit; the first that holds wins."""
    if fit.mu2 > th_high:
        return MergeDecision(Verdict.MERGE, CaseTag.CASE1, fit)
    if fit.w1 > 0.5:
        return MergeDecision(Verdict.MERGE, CaseTag.CASE2, fit)
    if fit.mu1 - fit.sigma1 < fit.mu2 + fit.sigma2 + epsilon and fit.mu1 > th_low:
        return MergeDecision(Verdict.MERGE, CaseTag.CASE3, fit)
    return MergeDecision(Verdict.NO_MERGE, CaseTag.CASE4, fit)


def combine_decisions(decisions: Sequence[MergeDecision]) -> MergeDecision:
    """Strict-majority vote over per-model decisions.

    MERGE needs more than half of the votes; an even split is NO_MERGE. The
    reported case is the most common one among the winning side, ties going
    to the lowest case number.
    """
    if len(decisions) == 0:
        raise ValueError("At least one decision is required")

    n_merge = sum(d.merge for d in decisions)
    verdict = Verdict.MERGE if 2 * n_merge > len(decisions) else Verdict.NO_MERGE
    winners = [d for d in decisions if d.verdict == verdict]

    counts = Counter(d.case_tag for d in winners)
    case_tag = min(counts, key=lambda tag: (-counts[tag], tag.value))
    fit = next(d.fit for d in winners if d.case_tag == case_tag)
    return MergeDecision(verdict, case_tag, fit, per_model=tuple(decisions))


def assess_subclasses(
    subclasses: Sequence[np.ndarray],
    models: Sequence[EmbeddingMatrix],
    config: RunConfig,
) -> MergeDecision:
    """Fit and decide per model, then combine by strict majority.

    Args:
        subclasses (list[np.ndarray]): Disjoint utterance index sets
        models (list[EmbeddingMatrix]): Normalized embeddings, one per model
        config (RunConfig): Supplies thresholds, EM settings, the subsample
            cap and the seed

    Returns:
        MergeDecision: Combined decision, per-model decisions attached.
    """
    if len(models) == 0:
        raise ValueError("At least one model is required")

    decisions = []
    for m in models:
        scores = collect_scores(
            subclasses, m, max_utterances=config.assess_max_utterances, seed=config.seed
        )
        fit = fit_double_gaussian(
            scores,
            sigma_floor=config.sigma_floor,
            max_iters=config.em_max_iters,
            tol=config.em_tol,
        )
        decisions.append(decide_merge(fit, config.th_high, config.th_low, config.epsilon))

    decision = combine_decisions(decisions)
    logger.debug(
        "Assessment of %s: %s (%s), votes %s"
        % (
            [int(np.min(s)) for s in subclasses],
            decision.verdict.value,
            decision.case_tag.value,
            [d.verdict.value for d in decisions],
        )
    )
    return decision


def pairwise_merge_closure(
    class_ids: Sequence[int], assess_pair: Callable[[int, int], MergeDecision]
) -> Tuple[List[List[int]], Dict[Tuple[int, int], MergeDecision]]:
    """Group classes by the transitive closure of pairwise MERGE verdicts.

    Args:
        class_ids (list[int]): Classes to assess, pairwise
        assess_pair (callable): Returns the decision for a pair (a, b), a < b

    Returns:
        tuple: (groups, decisions). Groups are sorted lists of class ids,
            ordered by their smallest id; decisions maps every assessed pair.
    """
    class_ids = sorted(set(int(c) for c in class_ids))
    position = {c: i for i, c in enumerate(class_ids)}
    uf = UnionFind(len(class_ids))
    decisions = {}
    for i, a in enumerate(class_ids):
        for b in class_ids[i + 1 :]:
            decision = assess_pair(a, b)
            decisions[(a, b)] = decision
            if decision.merge:
                uf.union(position[a], position[b])

    groups: Dict[int, List[int]] = {}
    for c in class_ids:
        groups.setdefault(uf.find(position[c]), []).append(c)
    return sorted(groups.values(), key=lambda g: g[0]), decisions
