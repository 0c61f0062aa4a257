# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""The speaker relationship graph.

A pivot's IPS is the star joining it to its k nearest neighbors under one
model. The MIPS keeps the star edges every model agrees on (or at least
``quorum`` of them), and the graph is the union of the MIPS of all pivots.
Its connected components are the pseudo-classes.
"""

import logging
from collections import Counter
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from ..core_types import PseudoLabels
from ..knn import NeighborTable, topk_slice
from .union_find import UnionFind

logger = logging.getLogger(__name__)


class Edge(NamedTuple):
    a: int
    b: int

    @classmethod
    def of(cls, x: int, y: int) -> "Edge":
        """Canonical edge between x and y, stored with a < b."""
        x, y = int(x), int(y)
        if x == y:
            raise ValueError("Self edges are not allowed (node %d)" % x)
        return cls(x, y) if x < y else cls(y, x)


class SpeakerGraph:
    """Undirected graph over utterance indices with incremental components.

    ``in_graph`` marks the utterances placed in the graph; every edge endpoint is in
    it. Components only ever merge; removing nodes means building a new
    graph from the surviving edges.

    Args:
        num_nodes (int): Number of utterances M
    """

    def __init__(self, num_nodes: int):
        self.num_nodes = int(num_nodes)
        self.edges: Set[Edge] = set()
        self.uf = UnionFind(self.num_nodes)
        self.in_graph = np.zeros(self.num_nodes, dtype=bool)

    @classmethod
    def from_edges(cls, num_nodes: int, edges: Iterable[Tuple[int, int]]) -> "SpeakerGraph":
        g = cls(num_nodes)
        for a, b in edges:
            g.add_edge(a, b)
        return g

    def __repr__(self):
        return "SpeakerGraph: %d nodes in graph, %d edges" % (
            int(np.count_nonzero(self.in_graph)),
            len(self.edges),
        )

    def add_edge(self, a: int, b: int) -> Edge:
        e = Edge.of(a, b)
        self.edges.add(e)
        self.in_graph[e.a] = True
        self.in_graph[e.b] = True
        self.uf.union(e.a, e.b)
        return e

    def has_edge(self, a: int, b: int) -> bool:
        return Edge.of(a, b) in self.edges

    def copy(self) -> "SpeakerGraph":
        return SpeakerGraph.from_edges(self.num_nodes, sorted(self.edges))

    def component_roots(self) -> np.ndarray:
        """Union-find root per utterance, -1 for utterances outside the graph."""
        roots = self.uf.roots()
        roots[~self.in_graph] = -1
        return roots

    def edge_array(self) -> np.ndarray:
        """Edges as a lexicographically sorted (E, 2) array."""
        if len(self.edges) == 0:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(sorted(self.edges), dtype=np.int64)

    def remove_nodes(self, nodes: Iterable[int]) -> "SpeakerGraph":
        """New graph without nodes and their incident edges."""
        drop = set(int(i) for i in nodes)
        return SpeakerGraph.from_edges(
            self.num_nodes,
            sorted(e for e in self.edges if e.a not in drop and e.b not in drop),
        )


def build_ips(t: NeighborTable, pivot: int, k: int) -> Set[Edge]:
    """Canonical star edges from pivot to its top-k neighbors in t."""
    return {Edge.of(pivot, j) for j, _ in topk_slice(t, pivot, k)}


def build_mips(
    tables: Sequence[NeighborTable], pivot: int, k: int, quorum: Optional[int] = None
) -> Set[Edge]:
    """Star edges of pivot present in at least quorum of the per-model IPS.

    Args:
        tables (list[NeighborTable]): One table per model
        pivot (int): Pivot utterance
        k (int): Neighbor depth
        quorum (int, optional): Votes required. Defaults to None, meaning
            all models (the unanimous vote).

    Returns:
        set[Edge]: The multi-model IPS of pivot.
    """
    quorum = len(tables) if quorum is None else quorum
    votes = Counter()
    for t in tables:
        votes.update(build_ips(t, pivot, k))
    return {e for e, n in votes.items() if n >= quorum}


def aggregate(mips_per_pivot: Iterable[Set[Edge]], num_nodes: int) -> SpeakerGraph:
    """Union of all pivots' MIPS as a SpeakerGraph."""
    edges = set()
    for mips in mips_per_pivot:
        edges.update(mips)
    return SpeakerGraph.from_edges(num_nodes, sorted(edges))


def build_mips_edges(
    tables: Sequence[NeighborTable], k: int, quorum: Optional[int] = None
) -> np.ndarray:
    """Vectorized union of build_mips over every active pivot.

    Args:
        tables (list[NeighborTable]): One table per model, same rows
        k (int): Neighbor depth
        quorum (int, optional): Votes required per pivot. Defaults to None
            (all models).

    Returns:
        np.ndarray: Canonical edges as a sorted (E, 2) int64 array.
    """
    if len(tables) == 0:
        raise ValueError("At least one neighbor table is required")
    quorum = len(tables) if quorum is None else quorum
    M = tables[0].rows

    directed_keys = []
    for t in tables:
        idx, _ = t.topk(k)
        pivots = np.repeat(np.arange(M, dtype=np.int64), idx.shape[1])
        neighbors = idx.ravel()
        valid = neighbors >= 0
        directed_keys.append(pivots[valid] * M + neighbors[valid])

    # A directed (pivot, neighbor) key appears at most once per model, so its
    # count is the number of models voting for that star edge
    keys, votes = np.unique(np.concatenate(directed_keys), return_counts=True)
    keys = keys[votes >= quorum]

    pivots, neighbors = keys // M, keys % M
    a = np.minimum(pivots, neighbors)
    b = np.maximum(pivots, neighbors)
    canonical = np.unique(a * M + b)
    return np.stack([canonical // M, canonical % M], axis=1).astype(np.int64)


def edge_keys(edges: np.ndarray, num_nodes: int) -> np.ndarray:
    """Scalar keys a * M + b of an (E, 2) canonical edge array."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return edges[:, 0] * num_nodes + edges[:, 1]


def keys_to_edges(keys: np.ndarray, num_nodes: int) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64)
    return np.stack([keys // num_nodes, keys % num_nodes], axis=1)


def connected_components(g: SpeakerGraph) -> np.ndarray:
    """Dense component id per utterance; -1 outside the graph.

    Components are numbered by their smallest member.
    """
    return PseudoLabels.from_components(g.component_roots()).label.copy()


def component_members(component_ids: np.ndarray) -> Dict[int, np.ndarray]:
    """Map each non-negative id to the sorted indices carrying it."""
    component_ids = np.asarray(component_ids)
    labeled = np.flatnonzero(component_ids >= 0)
    order = labeled[np.argsort(component_ids[labeled], kind="stable")]
    ids, starts = np.unique(component_ids[order], return_index=True)
    groups = np.split(order, starts[1:])
    return {int(i): np.sort(members) for i, members in zip(ids, groups)}


def assign_initial_labels(g: SpeakerGraph, min_size: int) -> Tuple[PseudoLabels, SpeakerGraph]:
    """Label components of at least min_size utterances and prune the rest.

    Args:
        g (SpeakerGraph): Aggregated graph
        min_size (int): Smallest component that receives a label

    Returns:
        tuple: (labels, pruned graph). Members of smaller components get -1
            and leave the graph together with their edges.
    """
    components = connected_components(g)
    sizes = np.bincount(components[components >= 0], minlength=1)
    small = np.flatnonzero((components >= 0) & (sizes[np.maximum(components, 0)] < min_size))

    pruned = g.remove_nodes(small) if small.size > 0 else g.copy()
    labels = PseudoLabels.from_components(pruned.component_roots())
    logger.debug(
        "Initial labeling: %d components, %d kept with %d utterances, %d pruned"
        % (
            int(components.max(initial=-1)) + 1,
            labels.num_classes,
            int(np.count_nonzero(labels.label >= 0)),
            small.size,
        )
    )
    return labels, pruned


__all__: List[str] = [
    "Edge",
    "SpeakerGraph",
    "build_ips",
    "build_mips",
    "aggregate",
    "build_mips_edges",
    "edge_keys",
    "keys_to_edges",
    "connected_components",
    "component_members",
    "assign_initial_labels",
]
