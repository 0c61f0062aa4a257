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
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .core_types import EmbeddingMatrix, normalize_rows
from .exceptions import DegenerateCenter, DepthExceeded, TooFewActive
from .knn import NeighborTable

logger = logging.getLogger(__name__)

HIGH_DEGREE = "HIGH_DEGREE"


@dataclass(frozen=True)
class RemovalReport:
    """Utterances removed by the high-degree filter.

    ``removed`` is the sorted union over models; ``per_model_counts`` holds
    how many each model flagged before the union.
    """

    removed: np.ndarray
    per_model_counts: List[int] = field(default_factory=list)
    reason: str = HIGH_DEGREE

    def __post_init__(self):
        removed = np.unique(np.asarray(self.removed, dtype=np.int64))
        removed.setflags(write=False)
        object.__setattr__(self, "removed", removed)
        object.__setattr__(self, "per_model_counts", list(self.per_model_counts))

    def __len__(self):
        return self.removed.size


def statistic_adapt(
    m: EmbeddingMatrix, source_mean: Optional[np.ndarray] = None
) -> EmbeddingMatrix:
    """Align the domain center of m and renormalize.

    Without a source mean the rows are recentered on the origin by
    subtracting their mean row. With one, they are moved onto it instead,
    i.e. x - mean(target) + source_mean.

    Args:
        m (EmbeddingMatrix): Normalized embeddings with at least 2 rows
        source_mean (np.ndarray, optional): Mean embedding of the domain to
            align to, of length D. Defaults to None.

    Returns:
        EmbeddingMatrix: Adapted, unit-norm embeddings with the same shape.

    Raises:
        TooFewActive: If m has fewer than 2 rows.
        DegenerateCenter: If a row vanishes after recentering (all rows
            identical).
    """
    if m.rows < 2:
        raise TooFewActive(m.rows)

    data = np.asarray(m.data, dtype=np.float64)
    shift = -data.mean(axis=0)
    if source_mean is not None:
        source_mean = np.asarray(source_mean, dtype=np.float64).ravel()
        if source_mean.size != m.dim:
            raise ValueError(
                "source_mean has %d entries, embeddings have %d dims" % (source_mean.size, m.dim)
            )
        shift = shift + source_mean

    centered = data + shift
    norms = np.linalg.norm(centered, axis=1)
    if np.any(norms < 1e-12):
        raise DegenerateCenter(
            "Recentering leaves %d zero rows; the rows are (nearly) identical."
            % np.count_nonzero(norms < 1e-12)
        )

    logger.debug("Model %d: center shift of norm %.4f" % (m.model_id, np.linalg.norm(shift)))
    return normalize_rows(EmbeddingMatrix(centered, model_id=m.model_id))


def rank_similarity(t: NeighborTable, rank: int) -> np.ndarray:
    """Similarity of each active utterance to its rank-th neighbor.

    When fewer neighbors exist the last one is used. Inactive rows are NaN.
    """
    if rank < 1:
        raise ValueError("rank must be at least 1")
    if t.k_computed < rank and t.k_computed < t.num_active - 1:
        raise DepthExceeded(rank, t.k_computed)

    out = np.full(t.rows, np.nan)
    active = np.flatnonzero(t.active_mask & (t.counts > 0))
    position = np.minimum(rank, t.counts[active]) - 1
    out[active] = t.similarities[active, position]
    return out


def find_high_degree_outliers(
    models: Sequence[NeighborTable], rank: int, threshold: float
) -> RemovalReport:
    """Flag utterances whose rank-th neighbor is more similar than threshold.

    Args:
        models (list[NeighborTable]): One table per model, each of depth at
            least min(rank, active - 1)
        rank (int): Neighbor rank to inspect; 0 disables the filter
        threshold (float): Similarity above which an utterance is flagged

    Returns:
        RemovalReport: Union of the per-model flags.
    """
    if rank <= 0:
        return RemovalReport(np.zeros(0, dtype=np.int64), [0] * len(models))

    flagged = []
    for t in models:
        similarity = rank_similarity(t, rank)
        flagged.append(np.flatnonzero(np.nan_to_num(similarity, nan=-np.inf) > threshold))
        logger.info(
            "Model %d: %d utterances have their neighbor #%d above %.3f"
            % (t.model_id, flagged[-1].size, rank, threshold)
        )

    if len(flagged) > 0:
        removed = np.unique(np.concatenate(flagged))
    else:
        removed = np.zeros(0, dtype=np.int64)
    logger.info("Removing %d high-degree utterances in total" % removed.size)
    return RemovalReport(removed, [int(f.size) for f in flagged])


def apply_removal(mask: np.ndarray, report: RemovalReport) -> np.ndarray:
    """Return a copy of mask with the removed utterances set inactive."""
    mask = np.array(mask, dtype=bool)
    mask[report.removed] = False
    return mask
