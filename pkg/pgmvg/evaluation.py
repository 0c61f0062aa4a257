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
from dataclasses import asdict, dataclass
from typing import Sequence, Tuple, Union

import numpy as np
import pandas as pd
import polars as pl
from sklearn.metrics import normalized_mutual_info_score
from sklearn.metrics.cluster import pair_confusion_matrix

from .core_types import PseudoLabels, UtteranceSet
from .exceptions import CountMismatch, DegenerateLabels, NoLabeledPairs

logger = logging.getLogger(__name__)

LabelsLike = Union[PseudoLabels, Sequence[int], np.ndarray]


@dataclass(frozen=True)
class ClusterReport:
    pairwise_precision: float
    pairwise_recall: float
    pairwise_f: float
    nmi: float
    num_pred_classes: int
    num_true_classes: int
    coverage: float

    def to_frame(self) -> pd.DataFrame:
        """One-row dataframe, the layout printed by ``pgmvg eval``."""
        return pd.DataFrame([asdict(self)])


def _as_array(labels: LabelsLike) -> np.ndarray:
    if isinstance(labels, PseudoLabels):
        return labels.label
    return np.asarray(labels, dtype=np.int64)


def _covered(pred: LabelsLike, truth: LabelsLike) -> Tuple[np.ndarray, np.ndarray]:
    pred, truth = _as_array(pred), _as_array(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth must have equal lengths")
    covered = (pred >= 0) & (truth >= 0)
    return pred[covered], truth[covered]


def pairwise_scores(pred: LabelsLike, truth: LabelsLike) -> Tuple[float, float, float]:
    """Pairwise precision, recall and F-measure over covered utterances.

    Pairs where either label is -1 do not count.

    Args:
        pred (PseudoLabels | array): Predicted labels
        truth (PseudoLabels | array): True labels

    Returns:
        tuple: (precision, recall, f)

    Raises:
        NoLabeledPairs: If no two covered utterances share a predicted label.
    """
    pred, truth = _covered(pred, truth)
    if pred.size < 2:
        raise NoLabeledPairs("Fewer than 2 utterances are labeled on both sides.")

    # Counts of ordered pairs: [different, same] truth by [different, same] pred
    confusion = pair_confusion_matrix(truth, pred).astype(np.float64)
    both = confusion[1, 1]
    same_pred = both + confusion[0, 1]
    same_truth = both + confusion[1, 0]
    if same_pred == 0:
        raise NoLabeledPairs("No two utterances share a predicted label.")

    precision = both / same_pred
    recall = both / same_truth if same_truth > 0 else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return float(precision), float(recall), float(f)


def nmi(pred: LabelsLike, truth: LabelsLike) -> float:
    """Normalized mutual information (arithmetic normalization) over covered
    utterances.

    Raises:
        DegenerateLabels: If either side has fewer than 2 classes.
    """
    pred, truth = _covered(pred, truth)
    if np.unique(pred).size < 2 or np.unique(truth).size < 2:
        raise DegenerateLabels("NMI needs at least 2 classes on each side.")
    return float(normalized_mutual_info_score(truth, pred, average_method="arithmetic"))


def evaluate(pred: LabelsLike, truth: LabelsLike) -> ClusterReport:
    """All clustering-quality figures of pred against truth."""
    pred_array, truth_array = _as_array(pred), _as_array(truth)
    precision, recall, f = pairwise_scores(pred_array, truth_array)
    report = ClusterReport(
        pairwise_precision=precision,
        pairwise_recall=recall,
        pairwise_f=f,
        nmi=nmi(pred_array, truth_array),
        num_pred_classes=int(np.unique(pred_array[pred_array >= 0]).size),
        num_true_classes=int(np.unique(truth_array[truth_array >= 0]).size),
        coverage=float(np.mean(pred_array >= 0)) if pred_array.size > 0 else 0.0,
    )
    logger.debug("Evaluation: %s" % (report,))
    return report


def align_by_ids(
    pred_ids: UtteranceSet,
    pred: PseudoLabels,
    truth_ids: UtteranceSet,
    truth: PseudoLabels,
) -> np.ndarray:
    """Truth labels reordered to follow pred_ids.

    Raises:
        CountMismatch: If the two identifier sets differ.
    """
    position = {utt_id: i for i, utt_id in enumerate(truth_ids.ids)}
    missing = [utt_id for utt_id in pred_ids.ids if utt_id not in position]
    if len(missing) > 0 or len(pred_ids) != len(truth_ids):
        raise CountMismatch(len(pred_ids), len(truth_ids) - len(missing))
    return truth.label[[position[utt_id] for utt_id in pred_ids.ids]]


def cluster_statistics(labels: LabelsLike) -> Tuple[pl.DataFrame, dict]:
    """Class sizes of a labeling and their summary.

    Args:
        labels (PseudoLabels | array): Labels, -1 for unlabeled

    Returns:
        tuple: (polars dataframe with columns label and size sorted by
            label, dict with classes, labeled, unlabeled and the min, median
            and max class size)
    """
    label = _as_array(labels)
    df_sizes = (
        pl.DataFrame({"label": label})
        .filter(pl.col("label") >= 0)
        .group_by("label", maintain_order=False)
        .agg(pl.count().alias("size"))
        .sort("label")
    )
    sizes = df_sizes["size"].to_numpy()
    summary = {
        "classes": int(df_sizes.height),
        "labeled": int(sizes.sum()) if sizes.size > 0 else 0,
        "unlabeled": int(np.count_nonzero(label < 0)),
        "min_size": int(sizes.min()) if sizes.size > 0 else 0,
        "median_size": float(np.median(sizes)) if sizes.size > 0 else 0.0,
        "max_size": int(sizes.max()) if sizes.size > 0 else 0,
    }
    return df_sizes, summary
