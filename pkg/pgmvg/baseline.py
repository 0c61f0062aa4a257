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

import numpy as np
from scipy.cluster.vq import kmeans2

from .core_types import EmbeddingMatrix, PseudoLabels, normalize_rows

logger = logging.getLogger(__name__)


def kmeans_pseudo_labels(m: EmbeddingMatrix, num_classes: int, seed: int = 0) -> PseudoLabels:
    """k-means labels of the normalized rows of m, for comparison runs.

    Every utterance is labeled; empty clusters simply do not appear, and
    labels are renumbered densely by smallest member.

    Args:
        m (EmbeddingMatrix): Embeddings
        num_classes (int): Number of clusters k
        seed (int, optional): Seed of the k-means++ initialization.
            Defaults to 0.

    Returns:
        PseudoLabels: Dense labels covering all utterances.
    """
    if num_classes < 1 or num_classes > m.rows:
        raise ValueError("num_classes must lie in [1, %d], got %d" % (m.rows, num_classes))

    data = normalize_rows(m).data
    _, assignment = kmeans2(data, num_classes, minit="++", seed=np.random.default_rng(seed))
    labels = PseudoLabels.from_components(assignment)
    logger.debug("k-means baseline: %d non-empty clusters" % labels.num_classes)
    return labels
