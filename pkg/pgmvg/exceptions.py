# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Error types raised by the clustering engine.

Three families exist, and the command line maps each to an exit code:

    * DataFormatError: the input data is malformed or unusable (exit 2).
    * PgmvgConfigError: a configuration or generator spec is invalid (exit 1).
    * ComputationError: an internal precondition failed mid-run (exit 3).
"""

from pandas.errors import DataError


class PgmvgError(Exception):
    """Base class for all engine errors.

    The ``context`` attribute is filled in by the clustering driver with the
    iteration and stage at which the error surfaced.
    """

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.context = None

    def __str__(self):
        message = super().__str__()
        if self.context:
            return "[%s] %s" % (self.context, message)
        return message


class DataFormatError(PgmvgError, DataError):
    pass


class PgmvgConfigError(PgmvgError, ValueError):
    pass


class ComputationError(PgmvgError, RuntimeError):
    pass


# Data errors


class BadMagic(DataFormatError):
    def __init__(self, magic: bytes):
        super().__init__("Bad magic %r, expected b'PGMV'." % (magic,))
        self.magic = magic


class UnsupportedVersion(DataFormatError):
    def __init__(self, version: int):
        super().__init__("Unsupported embedding file version %d." % version)
        self.version = version


class TruncatedFile(DataFormatError):
    def __init__(self, expected: int, actual: int):
        super().__init__("File truncated: expected %d bytes, found %d." % (expected, actual))
        self.expected = expected
        self.actual = actual


class TrailingData(DataFormatError):
    def __init__(self, expected: int, actual: int):
        super().__init__("Trailing bytes: expected %d bytes, found %d." % (expected, actual))
        self.expected = expected
        self.actual = actual


class NonFiniteValue(DataFormatError):
    def __init__(self, row: int, col: int):
        super().__init__("Non-finite value at row %d, column %d." % (row, col))
        self.row = row
        self.col = col


class InvalidEmbeddings(DataFormatError):
    pass


class ShapeMismatch(DataFormatError):
    pass


class CountMismatch(DataFormatError):
    def __init__(self, expected: int, actual: int):
        super().__init__("Expected %d identifiers, found %d." % (expected, actual))
        self.expected = expected
        self.actual = actual


class DuplicateId(DataFormatError):
    def __init__(self, utt_id: str):
        super().__init__("Duplicate identifier '%s'." % utt_id)
        self.utt_id = utt_id


class EmptyId(DataFormatError):
    def __init__(self, line: int):
        super().__init__("Empty identifier on line %d." % line)
        self.line = line


class InvalidId(DataFormatError):
    def __init__(self, line: int):
        super().__init__("Identifier on line %d contains a tab character." % line)
        self.line = line


class InvalidEncoding(DataFormatError):
    def __init__(self, path: str):
        super().__init__("%s is not valid UTF-8 text." % path)
        self.path = path


class MalformedTable(DataFormatError):
    def __init__(self, path: str, detail: str):
        super().__init__("Malformed table %s: %s" % (path, detail))
        self.path = path


class ZeroVectorRow(DataFormatError):
    def __init__(self, row: int):
        super().__init__("Row %d has zero norm and cannot be normalized." % row)
        self.row = row


class DegenerateCenter(DataFormatError):
    pass


class TooFewActive(DataFormatError):
    def __init__(self, n_active: int):
        super().__init__("At least 2 active utterances are required, found %d." % n_active)
        self.n_active = n_active


class EmptyAfterFilter(DataFormatError):
    pass


class InactiveUtterance(DataFormatError):
    def __init__(self, index: int):
        super().__init__("Utterance %d is not active in this neighbor table." % index)
        self.index = index


class NoLabeledPairs(DataFormatError):
    pass


class DegenerateLabels(DataFormatError):
    pass


# Configuration errors


class ConfigError(PgmvgConfigError):
    def __init__(self, field: str, constraint: str):
        super().__init__("Invalid configuration field '%s': %s" % (field, constraint))
        self.field = field
        self.constraint = constraint


class SpecError(PgmvgConfigError):
    def __init__(self, field: str, constraint: str):
        super().__init__("Invalid synthetic spec field '%s': %s" % (field, constraint))
        self.field = field
        self.constraint = constraint


# Computation errors


class DepthExceeded(ComputationError):
    def __init__(self, k: int, k_computed: int):
        super().__init__("Requested depth %d exceeds computed depth %d." % (k, k_computed))
        self.k = k
        self.k_computed = k_computed


class TooFewScores(ComputationError):
    def __init__(self, n_scores: int):
        super().__init__("At least 4 scores are required to fit, found %d." % n_scores)
        self.n_scores = n_scores


class TooFewUtterances(ComputationError):
    def __init__(self, n_utterances: int):
        super().__init__("At least 2 utterances are required, found %d." % n_utterances)
        self.n_utterances = n_utterances
