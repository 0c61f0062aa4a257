# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Binary ``.pgmv`` embedding files.

Layout, all little-endian::

    offset  size  field
    0       4     magic, the bytes b"PGMV"
    4       4     version, unsigned 32-bit, currently 1
    8       8     rows M, unsigned 64-bit
    16      8     dim D, unsigned 64-bit
    24      M*D*4 row-major 32-bit floats
"""

import logging
import os
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..core_types import EmbeddingMatrix
from ..exceptions import (
    BadMagic,
    NonFiniteValue,
    TrailingData,
    TruncatedFile,
    UnsupportedVersion,
)

logger = logging.getLogger(__name__)

MAGIC = b"PGMV"
VERSION = 1
HEADER = struct.Struct("<4sIQQ")
PAYLOAD_DTYPE = np.dtype("<f4")


def read_embeddings(path: Union[str, os.PathLike], model_id: int = 0) -> EmbeddingMatrix:
    """Read a ``.pgmv`` file.

    Args:
        path (str | PathLike): File to read
        model_id (int, optional): Extractor index to attach to the matrix.
            Defaults to 0.

    Returns:
        EmbeddingMatrix: float32 matrix with exactly the rows and columns
            declared in the header.

    Raises:
        BadMagic: If the file does not start with b"PGMV".
        UnsupportedVersion: If the version field is not 1.
        TruncatedFile: If the header or payload is shorter than declared.
        TrailingData: If bytes follow the declared payload.
        NonFiniteValue: At the first NaN or infinite entry.
    """
    raw = Path(path).read_bytes()

    if len(raw) >= len(MAGIC) and raw[: len(MAGIC)] != MAGIC:
        raise BadMagic(raw[: len(MAGIC)])
    if len(raw) < HEADER.size:
        raise TruncatedFile(HEADER.size, len(raw))

    _, version, rows, dim = HEADER.unpack_from(raw)
    if version != VERSION:
        raise UnsupportedVersion(version)

    expected = HEADER.size + rows * dim * PAYLOAD_DTYPE.itemsize
    if len(raw) < expected:
        raise TruncatedFile(expected, len(raw))
    if len(raw) > expected:
        raise TrailingData(expected, len(raw))

    data = np.frombuffer(raw, dtype=PAYLOAD_DTYPE, count=rows * dim, offset=HEADER.size)
    data = data.reshape(rows, dim).astype(np.float32)

    not_finite = np.argwhere(~np.isfinite(data))
    if not_finite.shape[0] > 0:
        row, col = not_finite[0]
        raise NonFiniteValue(int(row), int(col))

    logger.debug("Read %d x %d embeddings from %s" % (rows, dim, path))
    return EmbeddingMatrix(data, model_id=model_id)


def write_embeddings(path: Union[str, os.PathLike], m: EmbeddingMatrix) -> None:
    """Write m as a ``.pgmv`` file, converting entries to 32-bit floats."""
    payload = np.ascontiguousarray(m.data, dtype=PAYLOAD_DTYPE)
    header = HEADER.pack(MAGIC, VERSION, payload.shape[0], payload.shape[1])
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload.tobytes())
    logger.debug("Wrote %d x %d embeddings to %s" % (payload.shape[0], payload.shape[1], path))
