# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Shared data model: embedding matrices, utterance sets, pseudo-labels and
the run configuration."""

from dataclasses import asdict, dataclass, fields, replace
from typing import List, Optional, Sequence

import numpy as np

from .exceptions import ConfigError, InvalidEmbeddings, ShapeMismatch, ZeroVectorRow

ZERO_NORM_TOL = 1e-12


@dataclass(frozen=True)
class EmbeddingMatrix:
    """M x D embeddings of one extractor; row i is the embedding of utterance i.

    Args:
        data (np.ndarray): Two-dimensional array of shape (M, D)
        model_id (int, optional): Index of the extractor. Defaults to 0.
    """

    data: np.ndarray
    model_id: int = 0

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise InvalidEmbeddings("Embeddings must be two-dimensional, got %d dims." % data.ndim)
        if data.shape[0] < 1 or data.shape[1] < 2:
            raise InvalidEmbeddings(
                "Embeddings need at least 1 row and 2 columns, got %s." % (data.shape,)
            )
        if not np.issubdtype(data.dtype, np.floating):
            data = data.astype(float)
        if not np.all(np.isfinite(data)):
            raise InvalidEmbeddings("Embeddings must be finite.")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class UtteranceSet:
    """Utterance identifiers and the mask of utterances still in play."""

    ids: tuple
    active_mask: np.ndarray = None

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        if any(len(i) == 0 for i in ids):
            raise ValueError("Utterance identifiers must be non-empty")
        if len(set(ids)) != len(ids):
            raise ValueError("Utterance identifiers must be unique")
        if self.active_mask is None:
            mask = np.ones(len(ids), dtype=bool)
        else:
            mask = np.array(self.active_mask, dtype=bool)
        if mask.shape != (len(ids),):
            raise ValueError("active_mask length must equal the number of identifiers")
        mask.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "active_mask", mask)

    def __len__(self):
        return len(self.ids)

    def with_mask(self, active_mask: np.ndarray) -> "UtteranceSet":
        return UtteranceSet(self.ids, active_mask)


@dataclass(frozen=True)
class PseudoLabels:
    """Per-utterance class labels; -1 marks unlabeled or removed utterances."""

    label: np.ndarray

    def __post_init__(self):
        label = np.array(self.label, dtype=np.int64)
        if label.ndim != 1:
            raise ValueError("Labels must be one-dimensional")
        label.setflags(write=False)
        object.__setattr__(self, "label", label)

    @property
    def num_classes(self) -> int:
        return int(np.unique(self.label[self.label >= 0]).size)

    @property
    def coverage(self) -> float:
        if self.label.size == 0:
            return 0.0
        return float(np.mean(self.label >= 0))

    def __len__(self):
        return self.label.size

    @classmethod
    def from_components(cls, component_ids: np.ndarray) -> "PseudoLabels":
        """Densify arbitrary non-negative component ids to 0..C-1.

        Classes are numbered in order of their smallest member index; negative
        ids stay -1.
        """
        component_ids = np.asarray(component_ids, dtype=np.int64)
        label = np.full(component_ids.size, -1, dtype=np.int64)
        labeled = np.flatnonzero(component_ids >= 0)
        if labeled.size > 0:
            _, first_index, inverse = np.unique(
                component_ids[labeled], return_index=True, return_inverse=True
            )
            # Rank classes by the position of their first (smallest) member
            rank = np.empty(first_index.size, dtype=np.int64)
            rank[np.argsort(first_index, kind="stable")] = np.arange(first_index.size)
            label[labeled] = rank[inverse]
        return cls(label)


@dataclass(frozen=True)
class RunConfig:
    """All tunables of a clustering run.

    By default k starts at 5 and grows by 5, th_high = 0.4 and th_low = 0.2,
    sub-graphs under 10 utterances are not labeled and an utterance is
    dropped when its 500th neighbor is more similar than 0.8. Assessments
    draw scores from at most assess_max_utterances utterances per class pair;
    None uses every pair.
    """

    k_init: int = 5
    k_step: int = 5
    k_max: int = 100
    th_high: float = 0.4
    th_low: float = 0.2
    epsilon: float = 0.05
    min_cluster_size: int = 10
    stop_new_node_frac: float = 0.01
    stop_cluster_delta_frac: float = 0.01
    outlier_rank: int = 500
    outlier_threshold: float = 0.8
    sigma_floor: float = 1e-4
    em_max_iters: int = 200
    em_tol: float = 1e-6
    seed: int = 0
    vote_quorum: Optional[int] = None
    assess_max_utterances: Optional[int] = 200

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    def to_lines(self) -> List[str]:
        """Render the config as ``key = value`` lines, in field order."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append("%s = %s" % (f.name, "none" if value is None else repr(value)))
        return lines

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]


# Alias to make the validated status explicit in signatures
ValidatedConfig = RunConfig


def normalize_rows(m: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale every row of m to unit Euclidean norm.

    Args:
        m (EmbeddingMatrix): Input embeddings

    Returns:
        EmbeddingMatrix: float64 embeddings with unit-norm rows and the same
            model_id.

    Raises:
        ZeroVectorRow: If a row has norm below 1e-12.
    """
    data = np.asarray(m.data, dtype=np.float64)
    norms = np.linalg.norm(data, axis=1)
    zero_rows = np.flatnonzero(norms < ZERO_NORM_TOL)
    if zero_rows.size > 0:
        raise ZeroVectorRow(int(zero_rows[0]))

    # Skip rows that are already unit so normalization is idempotent
    unit = np.abs(norms - 1.0) <= 1e-15
    scale = np.where(unit, 1.0, norms)
    return EmbeddingMatrix(data / scale[:, None], model_id=m.model_id)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cosine similarity between the rows of two normalized arrays."""
    return np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64).T


def _check(condition: bool, field_name: str, constraint: str):
    if not condition:
        raise ConfigError(field_name, constraint)


def validate_config(c: RunConfig, num_models: Optional[int] = None) -> ValidatedConfig:
    """Check every RunConfig invariant and return the config unchanged.

    Args:
        c (RunConfig): Configuration to check
        num_models (int, optional): Number of models of the run; when given,
            vote_quorum is also checked against it. Defaults to None.

    Returns:
        RunConfig: c itself.

    Raises:
        ConfigError: Naming the first field that violates a constraint.
    """
    _check(0.0 < c.th_low, "th_low", "0 < th_low")
    _check(c.th_low < c.th_high, "th_low", "th_low < th_high")
    _check(c.th_high < 1.0, "th_high", "th_high < 1")
    _check(c.k_init >= 1, "k_init", "k_init >= 1")
    _check(c.k_step >= 1, "k_step", "k_step >= 1")
    _check(c.k_max >= c.k_init, "k_max", "k_max >= k_init")
    _check(c.min_cluster_size >= 2, "min_cluster_size", "min_cluster_size >= 2")
    _check(c.epsilon >= 0.0, "epsilon", "epsilon >= 0")
    _check(c.sigma_floor > 0.0, "sigma_floor", "sigma_floor > 0")
    _check(0.0 < c.stop_new_node_frac < 1.0, "stop_new_node_frac", "0 < value < 1")
    _check(0.0 <= c.stop_cluster_delta_frac < 1.0, "stop_cluster_delta_frac", "0 <= value < 1")
    _check(c.outlier_rank >= 0, "outlier_rank", "outlier_rank >= 0")
    _check(-1.0 < c.outlier_threshold <= 1.0, "outlier_threshold", "-1 < value <= 1")
    _check(c.em_max_iters >= 1, "em_max_iters", "em_max_iters >= 1")
    _check(c.em_tol > 0.0, "em_tol", "em_tol > 0")
    _check(c.seed >= 0, "seed", "seed >= 0")
    if c.assess_max_utterances is not None:
        _check(c.assess_max_utterances >= 4, "assess_max_utterances", "value >= 4")
    if c.vote_quorum is not None:
        _check(c.vote_quorum >= 1, "vote_quorum", "vote_quorum >= 1")
        if num_models is not None:
            _check(c.vote_quorum <= num_models, "vote_quorum", "vote_quorum <= number of models")
    return c


def check_same_rows(models: Sequence[EmbeddingMatrix]) -> int:
    """Return the shared row count M of models, or raise ShapeMismatch."""
    if len(models) == 0:
        raise ShapeMismatch("At least one embedding matrix is required.")
    rows = {m.rows for m in models}
    if len(rows) != 1:
        raise ShapeMismatch("All embedding matrices must have the same rows, got %s." % rows)
    return rows.pop()


__all__ = [
    "EmbeddingMatrix",
    "UtteranceSet",
    "PseudoLabels",
    "RunConfig",
    "ValidatedConfig",
    "normalize_rows",
    "cosine_similarity",
    "validate_config",
    "check_same_rows",
]
