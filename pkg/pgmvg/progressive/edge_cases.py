# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Handling of the edges a larger k brings in.

A new edge joins two utterances that are both in the graph (in-in), both
outside it (out-out), or one of each (in-out). Each kind has its own
processing step below; the driver runs them in that order.
"""

import enum
import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from ..assessment.merge_decision import MergeDecision, assess_subclasses, pairwise_merge_closure
from ..core_types import EmbeddingMatrix, RunConfig
from ..graph.speaker_graph import (
    Edge,
    SpeakerGraph,
    connected_components,
    edge_keys,
)
from .iteration_state import IterationState

logger = logging.getLogger(__name__)


class EdgeKind(str, enum.Enum):
    CASE_IN_IN = "CASE_IN_IN"
    CASE_OUT_OUT = "CASE_OUT_OUT"
    CASE_IN_OUT = "CASE_IN_OUT"


class EdgeCase(NamedTuple):
    kind: EdgeKind
    edge: Edge


def classify_edge(e: Tuple[int, int], g: SpeakerGraph) -> EdgeCase:
    """Kind of e given the current membership of its endpoints in g."""
    e = Edge.of(*e)
    in_a, in_b = bool(g.in_graph[e.a]), bool(g.in_graph[e.b])
    if in_a and in_b:
        return EdgeCase(EdgeKind.CASE_IN_IN, e)
    if not in_a and not in_b:
        return EdgeCase(EdgeKind.CASE_OUT_OUT, e)
    return EdgeCase(EdgeKind.CASE_IN_OUT, e)


@dataclass(frozen=True)
class FitRecord:
    """One model's fit in one assessment, as written by ``--dump-fits``."""

    k: int
    class_a: int
    class_b: int
    model: int
    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    w1: float
    verdict: str
    case: str


class MergeAssessor:
    """Runs class-pair assessments and caches their decisions.

    Classes are addressed by their union-find root; the cache key also
    holds the class sizes. Classes only grow, so a (root, size) pair always
    names the same members and a cached decision stays valid across
    iterations; a class that grew is assessed again.

    Args:
        models (list[EmbeddingMatrix]): Normalized embeddings, one per model
        config (RunConfig): Run configuration
        record_fits (bool, optional): Keep a FitRecord per model and
            assessment. Defaults to False.
    """

    def __init__(
        self, models: Sequence[EmbeddingMatrix], config: RunConfig, record_fits: bool = False
    ):
        self.models = list(models)
        self.config = config
        self.record_fits = record_fits
        self.fit_records: List[FitRecord] = []
        self.k = 0
        self.num_assessments = 0
        self._cache: Dict[Tuple, MergeDecision] = {}

    def start_iteration(self, k: int):
        self.k = k

    def assess_classes(self, state: IterationState, root_a: int, root_b: int) -> MergeDecision:
        members_a = state.class_members(root_a)
        members_b = state.class_members(root_b)
        key = tuple(sorted(((root_a, members_a.size), (root_b, members_b.size))))
        if key in self._cache:
            return self._cache[key]

        decision = assess_subclasses([members_a, members_b], self.models, self.config)
        self._cache[key] = decision
        self.num_assessments += 1

        if self.record_fits:
            class_a, class_b = sorted((int(members_a[0]), int(members_b[0])))
            for model, d in zip(self.models, decision.per_model):
                self.fit_records.append(
                    FitRecord(
                        k=self.k,
                        class_a=class_a,
                        class_b=class_b,
                        model=model.model_id,
                        verdict=d.verdict.value,
                        case=d.case_tag.value,
                        **d.fit.as_dict(),
                    )
                )
        return decision


def process_case_in_in(
    e: Tuple[int, int], state: IterationState, assessor: MergeAssessor
) -> IterationState:
    """Keep an edge inside one class; assess an edge across two classes.

    A MERGE verdict adds the edge, which unites the two classes. Otherwise
    the edge is discarded and counted as rejected.
    """
    e = Edge.of(*e)
    root_a, root_b = state.class_of(e.a), state.class_of(e.b)
    if root_a < 0 or root_b < 0:
        raise ValueError("Edge %s is not an in-in edge" % (tuple(e),))

    if root_a == root_b:
        state.add_edge(e.a, e.b)
        return state

    decision = assessor.assess_classes(state, root_a, root_b)
    if decision.merge:
        state.add_edge(e.a, e.b)
        state.merges += 1
    else:
        state.rejected_edges += 1
    return state


def process_case_out_out(
    edges: np.ndarray, state: IterationState, config: RunConfig
) -> IterationState:
    """Form new classes from edges among utterances outside the graph.

    Components of at least min_cluster_size utterances enter the graph with
    all their edges. Edges of smaller components stay pending for later
    iterations.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.shape[0] == 0:
        state.pending_keys = np.zeros(0, dtype=np.int64)
        return state
    if np.any(state.graph.in_graph[edges.ravel()]):
        raise ValueError("Out-out edges must have both endpoints outside the graph")

    local = SpeakerGraph.from_edges(state.num_nodes, edges)
    components = connected_components(local)
    sizes = np.bincount(components[components >= 0])
    component_of_edge = components[edges[:, 0]]
    accepted = sizes[component_of_edge] >= config.min_cluster_size

    for a, b in edges[accepted]:
        state.add_edge(int(a), int(b))
    state.pending_keys = np.sort(edge_keys(edges[~accepted], state.num_nodes))

    logger.debug(
        "Out-out: %d new classes from %d edges, %d edges pending"
        % (
            int(np.count_nonzero(sizes >= config.min_cluster_size)),
            int(np.count_nonzero(accepted)),
            int(np.count_nonzero(~accepted)),
        )
    )
    return state


def process_case_in_out(
    node: int, edges: Sequence[Tuple[int, int]], state: IterationState, assessor: MergeAssessor
) -> IterationState:
    """Attach an outside utterance through all its in-out edges at once.

    Touching a single class, the utterance joins it. Touching several, the
    classes are assessed pairwise; only if the closure of MERGE verdicts
    joins all of them does the utterance join (merging them). Otherwise it
    stays outside and its edges are dropped as rejected.
    """
    edges = [Edge.of(*e) for e in edges]
    if state.graph.in_graph[node]:
        raise ValueError("Utterance %d is already in the graph" % node)

    others = [e.b if e.a == node else e.a for e in edges]
    roots = sorted(set(state.class_of(j) for j in others))
    if len(roots) == 0 or roots[0] < 0:
        raise ValueError("In-out edges of %d must end inside the graph" % node)

    if len(roots) > 1:
        groups, _ = pairwise_merge_closure(
            roots, lambda a, b: assessor.assess_classes(state, a, b)
        )
        if len(groups) > 1:
            state.rejected_edges += len(edges)
            logger.debug(
                "Utterance %d bridges %d classes that do not merge; deleted" % (node, len(roots))
            )
            return state
        state.merges += len(roots) - 1

    for e in edges:
        state.add_edge(e.a, e.b)
    return state
