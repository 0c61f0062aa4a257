# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Progressive multi-model sub-graph clustering.

The pipeline is::

    normalize -> statistic adaptation -> high-degree filter -> kNN tables
        -> initial graph at k_init -> grow k by k_step until should_stop

Each iteration takes the MIPS edges new at the larger k (plus out-out edges
still pending) and processes in-in, out-out and in-out edges in that order.
"""

import logging
from contextlib import contextmanager
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..core_types import (
    EmbeddingMatrix,
    PseudoLabels,
    RunConfig,
    UtteranceSet,
    check_same_rows,
    normalize_rows,
    validate_config,
)
from ..exceptions import EmptyAfterFilter, PgmvgError, ShapeMismatch
from ..graph.speaker_graph import (
    SpeakerGraph,
    assign_initial_labels,
    build_mips_edges,
    edge_keys,
    keys_to_edges,
)
from ..knn import NeighborTable, build_neighbor_table, build_neighbor_tables
from ..preprocess import (
    RemovalReport,
    apply_removal,
    find_high_degree_outliers,
    statistic_adapt,
)
from .edge_cases import (
    MergeAssessor,
    process_case_in_in,
    process_case_in_out,
    process_case_out_out,
)
from .iteration_state import (
    STOP_CONVERGED,
    STOP_K_MAX,
    IterationRecord,
    IterationState,
    should_stop,
)

logger = logging.getLogger(__name__)

IterationCallback = Callable[[int, IterationState], None]


@contextmanager
def _stage(iteration: int, name: str):
    try:
        yield
    except PgmvgError as e:
        if e.context is None:
            e.context = "iteration=%d stage=%s" % (iteration, name)
        raise


def prepare_embeddings(
    models: Sequence[EmbeddingMatrix],
    skip_adaptation: bool = False,
    source_means: Optional[Sequence[np.ndarray]] = None,
) -> List[EmbeddingMatrix]:
    """Normalize every model and, unless skipped, apply statistic adaptation.

    Args:
        models (list[EmbeddingMatrix]): Raw embeddings, one per model
        skip_adaptation (bool, optional): Only normalize. Defaults to False.
        source_means (list[np.ndarray], optional): Per-model source-domain
            means to align to. Defaults to None.

    Returns:
        list[EmbeddingMatrix]: Unit-norm embeddings ready for the search.
    """
    if source_means is not None and len(source_means) != len(models):
        raise ShapeMismatch(
            "Got %d source means for %d models." % (len(source_means), len(models))
        )

    prepared = []
    for n, m in enumerate(models):
        m = normalize_rows(m)
        if not skip_adaptation:
            m = statistic_adapt(m, None if source_means is None else source_means[n])
        prepared.append(m)
    return prepared


def filter_outliers(
    models: Sequence[EmbeddingMatrix],
    mask: np.ndarray,
    config: RunConfig,
    threads: int = 1,
) -> Tuple[np.ndarray, RemovalReport]:
    """Drop utterances whose outlier_rank-th neighbor is above the threshold
    in any model. outlier_rank = 0 keeps everything."""
    n_active = int(np.count_nonzero(mask))
    if config.outlier_rank == 0 or n_active < 2:
        return np.array(mask, dtype=bool), RemovalReport(np.zeros(0), [0] * len(models))

    depth = min(config.outlier_rank, n_active - 1)
    tables = [build_neighbor_table(m, mask, depth, threads=threads) for m in models]
    report = find_high_degree_outliers(tables, config.outlier_rank, config.outlier_threshold)
    return apply_removal(mask, report), report


def mips_keys(tables: Sequence[NeighborTable], k: int, config: RunConfig) -> np.ndarray:
    """Sorted a * M + b keys of the aggregated MIPS edges at depth k."""
    return edge_keys(build_mips_edges(tables, k, config.vote_quorum), tables[0].rows)


def initial_state(
    tables: Sequence[NeighborTable], config: RunConfig, removal: Optional[RemovalReport] = None
) -> Tuple[IterationState, np.ndarray]:
    """Graph and labels at k_init, plus the MIPS keys they came from."""
    M = tables[0].rows
    keys = mips_keys(tables, config.k_init, config)
    graph = SpeakerGraph.from_edges(M, keys_to_edges(keys, M))
    _, pruned = assign_initial_labels(graph, config.min_cluster_size)

    pending = np.setdiff1d(keys, edge_keys(pruned.edge_array(), M))
    state = IterationState.from_graph(config.k_init, pruned, pending_keys=pending, removal=removal)
    nodes = int(np.count_nonzero(pruned.in_graph))
    state.history.append(
        IterationRecord(
            k=config.k_init,
            nodes=nodes,
            new_nodes=nodes,
            classes=state.labels.num_classes,
            merges=0,
            rejected_edges=0,
            active=int(np.count_nonzero(tables[0].active_mask)),
        )
    )
    return state, keys


def run_iteration(
    state: IterationState,
    tables: Sequence[NeighborTable],
    k: int,
    previous_keys: np.ndarray,
    assessor: MergeAssessor,
    iteration: int = 0,
) -> Tuple[IterationRecord, np.ndarray]:
    """Grow the graph from state.k_current to k.

    Args:
        state (IterationState): State after the previous iteration; updated
            in place
        tables (list[NeighborTable]): Neighbor tables of depth >= k
        k (int): New neighbor depth
        previous_keys (np.ndarray): MIPS keys at the previous depth
        assessor (MergeAssessor): Assessment runner holding models and config
        iteration (int, optional): Iteration number, for error context and
            logs. Defaults to 0.

    Returns:
        tuple: (record of this iteration, MIPS keys at k)
    """
    config = assessor.config
    M = state.num_nodes
    in_graph = state.graph.in_graph

    with _stage(iteration, "mips"):
        keys = mips_keys(tables, k, config)
        candidates = np.union1d(np.setdiff1d(keys, previous_keys), state.pending_keys)
        edges = keys_to_edges(candidates, M)

    nodes_before = int(np.count_nonzero(in_graph))
    in_a, in_b = in_graph[edges[:, 0]], in_graph[edges[:, 1]]
    in_in = edges[in_a & in_b]
    out_out = edges[~in_a & ~in_b]
    in_out = edges[in_a ^ in_b]

    state.merges = 0
    state.rejected_edges = 0
    assessor.start_iteration(k)

    with _stage(iteration, "in_in"):
        for a, b in in_in:
            process_case_in_in((int(a), int(b)), state, assessor)

    with _stage(iteration, "out_out"):
        process_case_out_out(out_out, state, config)

    with _stage(iteration, "in_out"):
        # Out endpoints that formed classes in the out-out step make these in-in
        both_in = in_graph[in_out[:, 0]] & in_graph[in_out[:, 1]]
        for a, b in in_out[both_in]:
            process_case_in_in((int(a), int(b)), state, assessor)

        attach = in_out[~both_in]
        out_node = np.where(in_graph[attach[:, 0]], attach[:, 1], attach[:, 0])
        for node in np.unique(out_node):
            node_edges = [(int(a), int(b)) for a, b in attach[out_node == node]]
            process_case_in_out(int(node), node_edges, state, assessor)

    state.k_current = k
    state.refresh()
    nodes = int(np.count_nonzero(state.graph.in_graph))
    record = IterationRecord(
        k=k,
        nodes=nodes,
        new_nodes=nodes - nodes_before,
        classes=state.labels.num_classes,
        merges=state.merges,
        rejected_edges=state.rejected_edges,
        active=int(np.count_nonzero(tables[0].active_mask)),
    )
    return record, keys


def run_pgmvg(
    models: Sequence[EmbeddingMatrix],
    ids: Optional[UtteranceSet],
    config: RunConfig,
    threads: int = 1,
    skip_adaptation: bool = False,
    source_means: Optional[Sequence[np.ndarray]] = None,
    iteration_callback: Optional[IterationCallback] = None,
    record_fits: bool = False,
) -> Tuple[PseudoLabels, IterationState]:
    """Cluster utterances into pseudo-labels with progressive multi-model
    voting graphs.

    Args:
        models (list[EmbeddingMatrix]): Embeddings of the same M utterances
            from N models
        ids (UtteranceSet, optional): Identifiers; its active mask marks the
            utterances taking part. None means all utterances.
        config (RunConfig): Run configuration
        threads (int, optional): Worker threads for the neighbor search.
            Results do not depend on it. Defaults to 1.
        skip_adaptation (bool, optional): Disable statistic adaptation.
            Defaults to False.
        source_means (list[np.ndarray], optional): Per-model source-domain
            means for the adaptation. Defaults to None.
        iteration_callback (callable, optional): Called as
            callback(iteration, state) after the initial labeling and after
            every iteration. Defaults to None.
        record_fits (bool, optional): Keep per-model fit records in
            state.fit_records. Defaults to False.

    Returns:
        tuple: (labels, state). Labels are dense over classes and -1 for
            utterances left unplaced or removed.

    Raises:
        EmptyAfterFilter: If no utterance survives the high-degree filter.
        PgmvgError: Any engine error, with context naming the iteration and
            stage where it occurred.
    """
    M = check_same_rows(models)
    if ids is not None and len(ids) != M:
        raise ShapeMismatch("Got %d identifiers for %d embedding rows." % (len(ids), M))
    validate_config(config, num_models=len(models))

    with _stage(0, "preprocess"):
        prepared = prepare_embeddings(models, skip_adaptation, source_means)
        mask = np.ones(M, dtype=bool) if ids is None else np.array(ids.active_mask)
        mask, report = filter_outliers(prepared, mask, config, threads)
        if not np.any(mask):
            raise EmptyAfterFilter("No utterance is left after the high-degree filter.")

    with _stage(0, "knn"):
        tables = build_neighbor_tables(prepared, mask, config.k_max, threads=threads)

    with _stage(0, "initial_graph"):
        state, keys = initial_state(tables, config, removal=report)

    assessor = MergeAssessor(prepared, config, record_fits=record_fits)
    iteration = 0
    logger.info(state.history[-1].log_line(iteration))
    if iteration_callback is not None:
        iteration_callback(iteration, state)

    while True:
        if should_stop(state.history, config):
            if state.history[-1].k >= config.k_max:
                state.stop_reason = STOP_K_MAX
            else:
                state.stop_reason = STOP_CONVERGED
            break
        if state.k_current + config.k_step > config.k_max:
            state.stop_reason = STOP_K_MAX
            break

        iteration += 1
        record, keys = run_iteration(
            state, tables, state.k_current + config.k_step, keys, assessor, iteration
        )
        state.history.append(record)
        logger.info(record.log_line(iteration))
        if iteration_callback is not None:
            iteration_callback(iteration, state)

    state.fit_records = assessor.fit_records
    logger.info(
        "Stopped (%s) at k=%d: %d classes covering %.1f%% of %d utterances"
        % (
            state.stop_reason,
            state.k_current,
            state.labels.num_classes,
            100.0 * state.labels.coverage,
            M,
        )
    )
    return state.labels, state
