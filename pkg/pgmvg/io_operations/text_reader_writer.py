# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.


import csv
import logging
import os
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..core_types import PseudoLabels, UtteranceSet
from ..exceptions import (
    CountMismatch,
    DataFormatError,
    DuplicateId,
    EmptyId,
    InvalidEncoding,
    InvalidId,
    MalformedTable,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


def _split_lines(text: str) -> List[str]:
    lines = text.split("\n")
    if len(lines) > 0 and lines[-1] == "":
        lines = lines[:-1]
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def read_ids(path: PathLike, expected: Optional[int] = None) -> UtteranceSet:
    """Read a ``.ids`` sidecar: UTF-8 text with one identifier per line.

    Args:
        path (str | PathLike): File to read
        expected (int, optional): Required number of identifiers, usually the
            row count M of the embedding files. Defaults to None (no check).

    Returns:
        UtteranceSet: Identifiers in file order, all active.

    Raises:
        EmptyId: If a line is empty.
        InvalidId: If an identifier contains a tab character.
        DuplicateId: At the second occurrence of an identifier.
        CountMismatch: If the number of identifiers differs from expected.
        InvalidEncoding: If the file is not UTF-8.
    """
    try:
        lines = _split_lines(Path(path).read_text(encoding="utf-8"))
    except UnicodeDecodeError:
        raise InvalidEncoding(str(path))

    seen = set()
    for line_number, utt_id in enumerate(lines, start=1):
        if len(utt_id) == 0:
            raise EmptyId(line_number)
        if "\t" in utt_id:
            raise InvalidId(line_number)
        if utt_id in seen:
            raise DuplicateId(utt_id)
        seen.add(utt_id)

    if expected is not None and len(lines) != expected:
        raise CountMismatch(expected, len(lines))

    return UtteranceSet(tuple(lines))


def write_ids(path: PathLike, ids: UtteranceSet) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for utt_id in ids.ids:
            f.write(utt_id + "\n")


def write_labels(path: PathLike, ids: UtteranceSet, labels: PseudoLabels) -> None:
    """Write ``<id>\\t<label>`` lines in identifier order.

    Removed and unlabeled utterances are written with label -1.
    """
    if len(ids) != len(labels):
        raise ValueError(
            "Number of identifiers (%d) and labels (%d) must agree" % (len(ids), len(labels))
        )

    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for utt_id, label in zip(ids.ids, labels.label):
            f.write("%s\t%d\n" % (utt_id, label))
    logger.debug("Wrote %d labels to %s" % (len(labels), path))


def read_labels(path: PathLike) -> Tuple[UtteranceSet, PseudoLabels]:
    """Read a labels TSV written by write_labels (or a truth file of the same
    layout) back into identifiers and labels."""
    try:
        df = pd.read_csv(
            path,
            sep="\t",
            header=None,
            dtype=str,
            quoting=csv.QUOTE_NONE,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        return UtteranceSet(tuple()), PseudoLabels(np.zeros(0, dtype=np.int64))
    except UnicodeDecodeError:
        raise InvalidEncoding(str(path))
    except pd.errors.ParserError as e:
        raise MalformedTable(str(path), str(e).strip())

    if df.shape[1] != 2:
        raise MalformedTable(str(path), "expected 2 columns, found %d" % df.shape[1])
    df.columns = ["id", "label"]

    try:
        label = df["label"].astype(np.int64).to_numpy()
    except (TypeError, ValueError):
        raise DataFormatError("Labels in %s must be integers." % path)

    if df["id"].duplicated().any():
        raise DuplicateId(str(df.loc[df["id"].duplicated(), "id"].iloc[0]))

    return UtteranceSet(tuple(df["id"])), PseudoLabels(label)


def write_table(path: PathLike, df: pd.DataFrame, header_lines: Optional[List[str]] = None):
    """Write a dataframe as TSV, optionally preceded by ``# ...`` comment lines."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in header_lines or []:
            f.write("# %s\n" % line)
        df.to_csv(f, sep="\t", index=False, lineterminator="\n", float_format="%.6g")


def read_table(path: PathLike) -> pd.DataFrame:
    """Read a TSV written by write_table, skipping the comment header."""
    return pd.read_csv(path, sep="\t", comment="#")
