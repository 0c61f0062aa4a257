# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Synthetic multi-model embedding worlds with known speakers.

Utterance u of speaker s seen by model n is

    normalize(R_n (c_s + intra_noise * g_u + model_noise * h_un))

with c_s a unit speaker center, g_u and h_un Gaussian vectors scaled so
their expected norm is 1, and R_n a random rotation per model (identity
when rotations are off). Junk utterances are near-copies of a single
random vector and carry truth label -1.
"""

import logging
import os
import re
from dataclasses import dataclass, fields, replace
from typing import List, Tuple, Union

import numpy as np
from scipy.stats import ortho_group

from .core_types import EmbeddingMatrix, UtteranceSet
from .exceptions import SpecError
from .io_operations.config_reader import build_dataclass, read_config_mapping

logger = logging.getLogger(__name__)

# Spread of junk utterances around their common vector
JUNK_NOISE = 0.01


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic world.

    utts_per_speaker is either a fixed count or an inclusive (low, high)
    range drawn per speaker, for imbalanced worlds.
    """

    num_speakers: int = 50
    utts_per_speaker: Union[int, Tuple[int, int]] = 40
    dim: int = 64
    intra_noise: float = 0.45
    model_count: int = 3
    model_rotation: bool = True
    model_noise: float = 0.1
    outlier_frac: float = 0.0
    seed: int = 0

    def replace(self, **changes) -> "SynthSpec":
        return replace(self, **changes)


def validate_spec(spec: SynthSpec) -> SynthSpec:
    """Check a SynthSpec and return it, or raise SpecError."""
    if spec.num_speakers < 2:
        raise SpecError("num_speakers", "num_speakers >= 2")
    if spec.dim < 8:
        raise SpecError("dim", "dim >= 8")
    if spec.intra_noise < 0:
        raise SpecError("intra_noise", "intra_noise >= 0")
    if spec.model_noise < 0:
        raise SpecError("model_noise", "model_noise >= 0")
    if spec.model_count < 1:
        raise SpecError("model_count", "model_count >= 1")
    if not 0.0 <= spec.outlier_frac < 1.0:
        raise SpecError("outlier_frac", "0 <= outlier_frac < 1")
    if spec.seed < 0:
        raise SpecError("seed", "seed >= 0")
    if isinstance(spec.utts_per_speaker, (tuple, list)):
        if len(spec.utts_per_speaker) != 2:
            raise SpecError("utts_per_speaker", "a count or a (low, high) range")
        low, high = spec.utts_per_speaker
        if not 1 <= low <= high:
            raise SpecError("utts_per_speaker", "1 <= low <= high")
    elif spec.utts_per_speaker < 1:
        raise SpecError("utts_per_speaker", "utts_per_speaker >= 1")
    return spec


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def generate(spec: SynthSpec) -> Tuple[List[EmbeddingMatrix], UtteranceSet, np.ndarray]:
    """Draw a synthetic world.

    Args:
        spec (SynthSpec): World parameters

    Returns:
        tuple: (one EmbeddingMatrix per model, utterance identifiers, truth
            labels with -1 for junk). Rows are in a seeded random order.

    Raises:
        SpecError: If spec is invalid.
    """
    validate_spec(spec)
    seeds = np.random.SeedSequence(spec.seed).spawn(1 + spec.model_count)
    rng = np.random.default_rng(seeds[0])
    D = spec.dim

    if isinstance(spec.utts_per_speaker, (tuple, list)):
        low, high = spec.utts_per_speaker
        sizes = rng.integers(low, high + 1, size=spec.num_speakers)
    else:
        sizes = np.full(spec.num_speakers, spec.utts_per_speaker)

    centers = _unit_rows(rng.standard_normal((spec.num_speakers, D)))
    truth = np.repeat(np.arange(spec.num_speakers), sizes)
    ids = ["spk%03d-utt%04d" % (s, u) for s, size in enumerate(sizes) for u in range(size)]
    base = centers[truth] + spec.intra_noise / np.sqrt(D) * rng.standard_normal((truth.size, D))

    n_junk = int(round(spec.outlier_frac * truth.size))
    if n_junk > 0:
        junk_center = _unit_rows(rng.standard_normal((1, D)))
        junk = junk_center + JUNK_NOISE / np.sqrt(D) * rng.standard_normal((n_junk, D))
        base = np.vstack([base, junk])
        truth = np.concatenate([truth, np.full(n_junk, -1)])
        ids += ["junk-%04d" % j for j in range(n_junk)]

    order = rng.permutation(truth.size)
    base, truth = base[order], truth[order].astype(np.int64)
    ids = [ids[i] for i in order]

    models = []
    for n in range(spec.model_count):
        model_rng = np.random.default_rng(seeds[1 + n])
        if spec.model_rotation:
            rotation = ortho_group.rvs(D, random_state=model_rng)
        else:
            rotation = np.eye(D)
        noise = spec.model_noise / np.sqrt(D) * model_rng.standard_normal(base.shape)
        models.append(EmbeddingMatrix(_unit_rows((base + noise) @ rotation.T), model_id=n))

    logger.info(
        "Synthetic world: %d speakers, %d utterances (%d junk), %d models"
        % (spec.num_speakers, truth.size, n_junk, spec.model_count)
    )
    return models, UtteranceSet(tuple(ids)), truth


def parse_utts_per_speaker(value) -> Union[int, Tuple[int, int]]:
    """Read ``40``, ``10-120``, ``10,120`` or a two-item list."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise SpecError("utts_per_speaker", "a count or a (low, high) range")
        return int(value[0]), int(value[1])
    if isinstance(value, (int, np.integer)):
        return int(value)
    text = str(value).strip().strip("[]()")
    parts = [p for p in re.split(r"\s*[-,:]\s*", text) if len(p) > 0]
    try:
        if len(parts) == 1:
            return int(parts[0])
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise SpecError("utts_per_speaker", "expected a count or 'low-high', got %r" % (value,))


def load_synth_spec(
    path: Union[str, os.PathLike, None] = None, overrides: dict = None
) -> SynthSpec:
    """Build a SynthSpec from a ``key = value`` or YAML file plus overrides."""
    values = read_config_mapping(path) if path is not None else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})

    unknown = sorted(set(values) - {f.name for f in fields(SynthSpec)})
    if len(unknown) > 0:
        raise SpecError(unknown[0], "unknown spec key")

    utts = values.pop("utts_per_speaker", None)
    spec = build_dataclass(SynthSpec, values, base=SynthSpec())
    if utts is not None:
        spec = spec.replace(utts_per_speaker=parse_utts_per_speaker(utts))
    return validate_spec(spec)
