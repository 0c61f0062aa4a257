# -*- coding: utf-8 -*-

"""Progressive multi-model voting graph clustering of utterance embeddings."""

from pathlib import Path

from . import (
    assessment,
    baseline,
    core_types,
    evaluation,
    exceptions,
    graph,
    io_operations,
    knn,
    preprocess,
    progressive,
    synthetic_data,
    timing_tests,
    utilities,
    visualization,
)

__version__ = (Path(__file__).parent / "version.py").read_text().strip()
