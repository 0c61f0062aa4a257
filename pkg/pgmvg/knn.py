# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Exact cosine k-nearest-neighbor tables.

Every table is computed to a fixed depth once and sliced afterwards, which
is what lets the progressive driver grow k without searching again. Lists
are ordered by descending similarity, ties going to the smaller index.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .core_types import EmbeddingMatrix
from .exceptions import DepthExceeded, InactiveUtterance, TooFewActive
from .utilities import generate_block_bounds, parallel_map

logger = logging.getLogger(__name__)

BLOCK_SIZE = 256


@dataclass(frozen=True)
class NeighborTable:
    """Ranked neighbor lists of one model.

    Row i of ``indices`` and ``similarities`` holds the neighbors of
    utterance i, padded with -1 and NaN beyond ``counts[i]``. Rows of
    inactive utterances are empty.
    """

    model_id: int
    k_computed: int
    indices: np.ndarray
    similarities: np.ndarray
    counts: np.ndarray
    active_mask: np.ndarray

    def __post_init__(self):
        for name in ("indices", "similarities", "counts", "active_mask"):
            array = np.asarray(getattr(self, name))
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def rows(self) -> int:
        return self.indices.shape[0]

    @property
    def num_active(self) -> int:
        return int(np.count_nonzero(self.active_mask))

    def topk(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """First k columns of the index and similarity arrays (views).

        Raises:
            DepthExceeded: If k > k_computed.
        """
        if k > self.k_computed:
            raise DepthExceeded(k, self.k_computed)
        k = max(int(k), 0)
        return self.indices[:, :k], self.similarities[:, :k]


def topk_slice(t: NeighborTable, i: int, k: int) -> List[Tuple[int, float]]:
    """The first k (index, similarity) entries of utterance i.

    Args:
        t (NeighborTable): Table to read
        i (int): Utterance index
        k (int): Number of neighbors, at most t.k_computed

    Returns:
        list[tuple]: Up to k (index, similarity) pairs; fewer only when fewer
            active neighbors exist.

    Raises:
        DepthExceeded: If k > t.k_computed.
        InactiveUtterance: If i is not active in t.
    """
    if k > t.k_computed:
        raise DepthExceeded(k, t.k_computed)
    if not t.active_mask[i]:
        raise InactiveUtterance(i)
    n = min(max(int(k), 0), int(t.counts[i]))
    return [(int(j), float(s)) for j, s in zip(t.indices[i, :n], t.similarities[i, :n])]


def _select_row(sim_row: np.ndarray, depth: int) -> np.ndarray:
    """Positions of the depth best entries of sim_row, exactly tie-broken."""
    if depth < sim_row.size:
        candidates = np.argpartition(-sim_row, depth - 1)[:depth]
        kth_value = sim_row[candidates].min()
        # Pull in everything tied with the boundary value before sorting
        candidates = np.flatnonzero(sim_row >= kth_value)
    else:
        candidates = np.arange(sim_row.size)
    order = np.lexsort((candidates, -sim_row[candidates]))
    return candidates[order[:depth]]


def _empty_table(rows: int, k_depth: int) -> Tuple[np.ndarray, ...]:
    indices = np.full((rows, k_depth), -1, dtype=np.int64)
    similarities = np.full((rows, k_depth), np.nan, dtype=np.float64)
    counts = np.zeros(rows, dtype=np.int64)
    return indices, similarities, counts


def _resolve_mask(m: EmbeddingMatrix, mask: Optional[np.ndarray]) -> np.ndarray:
    if mask is None:
        return np.ones(m.rows, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (m.rows,):
        raise ValueError(
            "mask length (%d) must equal the number of rows (%d)" % (mask.size, m.rows)
        )
    return mask


def build_neighbor_table(
    m: EmbeddingMatrix,
    mask: Optional[np.ndarray] = None,
    k_depth: int = 1,
    threads: int = 1,
    block_size: int = BLOCK_SIZE,
) -> NeighborTable:
    """Compute the exact cosine kNN table of m restricted to active rows.

    Rows are processed in fixed blocks of block_size; each block multiplies
    against all active rows and selects per row. The block split does not
    depend on threads, so the result is identical for every thread count.

    Args:
        m (EmbeddingMatrix): Normalized embeddings
        mask (np.ndarray, optional): Boolean active mask of length M.
            Defaults to None (all active).
        k_depth (int, optional): Depth to compute. Defaults to 1.
        threads (int, optional): Worker threads. Defaults to 1.
        block_size (int, optional): Rows per block. Defaults to 256.

    Returns:
        NeighborTable: Table of depth k_depth; rows hold min(k_depth,
            active - 1) neighbors.

    Raises:
        TooFewActive: If fewer than 2 utterances are active.
    """
    if k_depth < 1:
        raise ValueError("k_depth must be at least 1")
    mask = _resolve_mask(m, mask)
    active = np.flatnonzero(mask)
    if active.size < 2:
        raise TooFewActive(int(active.size))

    x = np.asarray(m.data, dtype=np.float64)[active]
    depth = min(k_depth, active.size - 1)
    indices, similarities, counts = _empty_table(m.rows, k_depth)

    def process_block(bounds):
        start, stop = bounds
        sim = x[start:stop] @ x.T
        sim[np.arange(stop - start), np.arange(start, stop)] = -np.inf
        block_idx = np.empty((stop - start, depth), dtype=np.int64)
        block_sim = np.empty((stop - start, depth), dtype=np.float64)
        for r in range(stop - start):
            selected = _select_row(sim[r], depth)
            block_idx[r] = selected
            block_sim[r] = sim[r, selected]
        return start, stop, block_idx, block_sim

    blocks = generate_block_bounds(int(active.size), block_size)
    for start, stop, block_idx, block_sim in parallel_map(process_block, blocks, threads):
        rows = active[start:stop]
        indices[rows, :depth] = active[block_idx]
        similarities[rows, :depth] = block_sim
        counts[rows] = depth

    logger.debug(
        "Model %d: neighbor table over %d active utterances, depth %d"
        % (m.model_id, active.size, k_depth)
    )
    return NeighborTable(
        model_id=m.model_id,
        k_computed=int(k_depth),
        indices=indices,
        similarities=similarities,
        counts=counts,
        active_mask=mask.copy(),
    )


def brute_force_neighbor_table(
    m: EmbeddingMatrix, mask: Optional[np.ndarray] = None, k_depth: int = 1
) -> NeighborTable:
    """Reference O(M^2 log M) table: full similarity matrix, full sort per row."""
    mask = _resolve_mask(m, mask)
    active = np.flatnonzero(mask)
    if active.size < 2:
        raise TooFewActive(int(active.size))

    x = np.asarray(m.data, dtype=np.float64)[active]
    sim = x @ x.T
    depth = min(k_depth, active.size - 1)
    indices, similarities, counts = _empty_table(m.rows, k_depth)

    for r, i in enumerate(active):
        others = np.delete(np.arange(active.size), r)
        order = np.lexsort((others, -sim[r, others]))[:depth]
        indices[i, :depth] = active[others[order]]
        similarities[i, :depth] = sim[r, others[order]]
        counts[i] = depth

    return NeighborTable(
        model_id=m.model_id,
        k_computed=int(k_depth),
        indices=indices,
        similarities=similarities,
        counts=counts,
        active_mask=mask.copy(),
    )


def build_neighbor_tables(
    models: List[EmbeddingMatrix],
    mask: Optional[np.ndarray],
    k_depth: int,
    threads: int = 1,
) -> List[NeighborTable]:
    """One table per model, all sharing mask and depth."""
    return [build_neighbor_table(m, mask, k_depth, threads=threads) for m in models]
