# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.


import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..core_types import PseudoLabels, RunConfig
from ..graph.speaker_graph import SpeakerGraph, component_members
from ..preprocess import RemovalReport

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["k", "nodes", "new_nodes", "classes", "merges", "rejected_edges"]

STOP_CONVERGED = "converged"
STOP_K_MAX = "k_max"


@dataclass(frozen=True)
class IterationRecord:
    k: int
    nodes: int
    new_nodes: int
    classes: int
    merges: int
    rejected_edges: int
    active: int

    def log_line(self, iteration: int) -> str:
        return (
            "iteration=%d k=%d nodes=%d new_nodes=%d classes=%d merges=%d rejected_edges=%d"
            % (
                iteration,
                self.k,
                self.nodes,
                self.new_nodes,
                self.classes,
                self.merges,
                self.rejected_edges,
            )
        )


@dataclass
class IterationState:
    """Mutable state of a clustering run.

    Classes are the connected components of ``graph``; ``members`` maps each
    component root to its sorted members and is kept in step with every
    edge added through add_edge. ``pending_keys`` holds out-out MIPS edges
    (as a * M + b keys) not yet part of any class. ``merges`` and
    ``rejected_edges`` count events of the iteration in progress.
    """

    k_current: int
    graph: SpeakerGraph
    labels: PseudoLabels
    history: List[IterationRecord] = field(default_factory=list)
    pending_keys: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    stop_reason: Optional[str] = None
    removal: Optional[RemovalReport] = None
    members: Dict[int, np.ndarray] = field(default_factory=dict)
    merges: int = 0
    rejected_edges: int = 0
    fit_records: list = field(default_factory=list)

    @classmethod
    def from_graph(cls, k: int, graph: SpeakerGraph, **kwargs) -> "IterationState":
        state = cls(k_current=k, graph=graph, labels=PseudoLabels(np.zeros(0)), **kwargs)
        state.refresh()
        return state

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    def refresh(self):
        """Recompute labels and the member map from the graph."""
        roots = self.graph.component_roots()
        self.members = component_members(roots)
        self.labels = PseudoLabels.from_components(roots)

    def class_of(self, i: int) -> int:
        """Component root of utterance i, -1 outside the graph."""
        if not self.graph.in_graph[i]:
            return -1
        return self.graph.uf.find(i)

    def class_members(self, root: int) -> np.ndarray:
        return self.members[root]

    def add_edge(self, a: int, b: int):
        """Add an edge to the graph and merge the member lists it joins."""
        parts = []
        seen = set()
        for node in (a, b):
            root = self.class_of(node)
            if root < 0:
                parts.append(np.array([node], dtype=np.int64))
            elif root not in seen:
                seen.add(root)
                parts.append(self.members.pop(root))
        self.graph.add_edge(a, b)
        self.members[self.graph.uf.find(a)] = np.unique(np.concatenate(parts))

    def history_frame(self) -> pd.DataFrame:
        """History as a dataframe with the TSV columns."""
        rows = [asdict(r) for r in self.history]
        return pd.DataFrame(rows, columns=HISTORY_COLUMNS + ["active"])[HISTORY_COLUMNS]


def should_stop(history: Sequence[IterationRecord], config: RunConfig) -> bool:
    """Decide whether the progressive growth of k is over.

    The run stops once k reaches k_max, or when, over the last two records,
    fewer than stop_new_node_frac of the active utterances entered the
    graph and the class count moved by less than stop_cluster_delta_frac.

    Args:
        history (list[IterationRecord]): Completed iterations, oldest first
        config (RunConfig): Stopping thresholds

    Returns:
        bool: True to stop.
    """
    if len(history) == 0:
        return False
    last = history[-1]
    if last.k >= config.k_max:
        return True
    if len(history) < 2:
        return False

    previous = history[-2]
    few_new_nodes = last.new_nodes < config.stop_new_node_frac * last.active
    class_delta = abs(last.classes - previous.classes) / max(last.classes, 1)
    return bool(few_new_nodes and class_delta < config.stop_cluster_delta_frac)
