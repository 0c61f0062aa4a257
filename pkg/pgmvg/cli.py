# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

"""Command line interface.

    pgmvg synth   --out-prefix world/ [--spec spec.cfg] [overrides]
    pgmvg cluster --emb m1.pgmv --emb m2.pgmv --ids utts.ids --out labels.tsv [...]
    pgmvg eval    --pred labels.tsv --truth truth.tsv
    pgmvg convert --input emb.txt --out emb.pgmv [--has-ids --ids-out utts.ids]

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 runtime error.
"""

import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional

import click
import numpy as np
import pandas as pd
import typer

from .core_types import EmbeddingMatrix, PseudoLabels, UtteranceSet, check_same_rows
from .evaluation import align_by_ids, cluster_statistics, evaluate
from .exceptions import (
    DataFormatError,
    InvalidEmbeddings,
    PgmvgConfigError,
    PgmvgError,
    ShapeMismatch,
)
from .io_operations.config_reader import load_run_config
from .io_operations.embedding_reader_writer import read_embeddings, write_embeddings
from .io_operations.text_reader_writer import (
    read_ids,
    read_labels,
    write_ids,
    write_labels,
    write_table,
)
from .progressive.pgmvg_clustering import run_pgmvg
from .synthetic_data import generate, load_synth_spec
from .utilities import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

app = typer.Typer(
    name="pgmvg",
    help="Progressive multi-model voting graph clustering of utterance embeddings.",
    add_completion=False,
    no_args_is_help=True,
)


def _prepare_parent(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)


@app.command()
def synth(
    out_prefix: str = typer.Option(..., "--out-prefix", help="Prefix of the written files"),
    spec: Optional[Path] = typer.Option(None, "--spec", help="Spec file, key = value or YAML"),
    num_speakers: Optional[int] = typer.Option(None, "--num-speakers"),
    utts_per_speaker: Optional[str] = typer.Option(
        None, "--utts-per-speaker", help="Count, or low-high range"
    ),
    dim: Optional[int] = typer.Option(None, "--dim"),
    intra_noise: Optional[float] = typer.Option(None, "--intra-noise"),
    model_count: Optional[int] = typer.Option(None, "--model-count"),
    model_noise: Optional[float] = typer.Option(None, "--model-noise"),
    model_rotation: Optional[bool] = typer.Option(
        None, "--rotation/--no-rotation", help="Random rotation per model"
    ),
    outlier_frac: Optional[float] = typer.Option(None, "--outlier-frac"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Generate a synthetic world: model<n>.pgmv files, utts.ids and truth.tsv."""
    configure_logging(verbose)
    synth_spec = load_synth_spec(
        spec,
        overrides={
            "num_speakers": num_speakers,
            "utts_per_speaker": utts_per_speaker,
            "dim": dim,
            "intra_noise": intra_noise,
            "model_count": model_count,
            "model_noise": model_noise,
            "model_rotation": model_rotation,
            "outlier_frac": outlier_frac,
            "seed": seed,
        },
    )
    models, ids, truth = generate(synth_spec)

    written = []
    for n, m in enumerate(models, start=1):
        path = Path(out_prefix + "model%d.pgmv" % n)
        _prepare_parent(path)
        write_embeddings(path, m)
        written.append(path)

    ids_path = Path(out_prefix + "utts.ids")
    write_ids(ids_path, ids)
    truth_path = Path(out_prefix + "truth.tsv")
    write_labels(truth_path, ids, PseudoLabels(truth))

    for path in written + [ids_path, truth_path]:
        typer.echo(str(path))


def _read_source_means(path: Path, models: List[EmbeddingMatrix]) -> List[np.ndarray]:
    means = read_embeddings(path)
    if means.rows != len(models):
        raise ShapeMismatch(
            "Source mean file has %d rows, expected one per model (%d)." % (means.rows, len(models))
        )
    for m in models:
        if m.dim != means.dim:
            raise ShapeMismatch(
                "Source means have %d dims, model %d has %d." % (means.dim, m.model_id, m.dim)
            )
    return [np.asarray(means.data[n], dtype=np.float64) for n in range(means.rows)]


@app.command()
def cluster(
    emb: List[Path] = typer.Option(..., "--emb", help="Embedding file, once per model"),
    ids: Path = typer.Option(..., "--ids", help="Identifier sidecar"),
    out: Path = typer.Option(..., "--out", help="Labels TSV to write"),
    config: Optional[Path] = typer.Option(None, "--config", help="Run config file"),
    history: Optional[Path] = typer.Option(None, "--history", help="History TSV to write"),
    threads: int = typer.Option(1, "--threads", min=1, help="Worker threads"),
    skip_adaptation: bool = typer.Option(False, "--skip-adaptation"),
    source_mean: Optional[Path] = typer.Option(
        None, "--source-mean", help="Source-domain means, one row per --emb file"
    ),
    dump_graph: Optional[Path] = typer.Option(None, "--dump-graph"),
    dump_fits: Optional[Path] = typer.Option(None, "--dump-fits"),
    k_init: Optional[int] = typer.Option(None, "--k-init"),
    k_step: Optional[int] = typer.Option(None, "--k-step"),
    k_max: Optional[int] = typer.Option(None, "--k-max"),
    th_high: Optional[float] = typer.Option(None, "--th-high"),
    th_low: Optional[float] = typer.Option(None, "--th-low"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon"),
    min_cluster_size: Optional[int] = typer.Option(None, "--min-cluster-size"),
    stop_new_node_frac: Optional[float] = typer.Option(None, "--stop-new-node-frac"),
    stop_cluster_delta_frac: Optional[float] = typer.Option(None, "--stop-cluster-delta-frac"),
    outlier_rank: Optional[int] = typer.Option(None, "--outlier-rank"),
    outlier_threshold: Optional[float] = typer.Option(None, "--outlier-threshold"),
    sigma_floor: Optional[float] = typer.Option(None, "--sigma-floor"),
    em_max_iters: Optional[int] = typer.Option(None, "--em-max-iters"),
    em_tol: Optional[float] = typer.Option(None, "--em-tol"),
    vote_quorum: Optional[int] = typer.Option(None, "--vote-quorum"),
    assess_max_utterances: Optional[str] = typer.Option(
        None, "--assess-max-utterances", help="Subsample cap per assessment, or none for all pairs"
    ),
    seed: Optional[int] = typer.Option(None, "--seed"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Cluster utterances and write their pseudo-labels."""
    configure_logging(verbose)
    run_config = load_run_config(
        config,
        overrides={
            "k_init": k_init,
            "k_step": k_step,
            "k_max": k_max,
            "th_high": th_high,
            "th_low": th_low,
            "epsilon": epsilon,
            "min_cluster_size": min_cluster_size,
            "stop_new_node_frac": stop_new_node_frac,
            "stop_cluster_delta_frac": stop_cluster_delta_frac,
            "outlier_rank": outlier_rank,
            "outlier_threshold": outlier_threshold,
            "sigma_floor": sigma_floor,
            "em_max_iters": em_max_iters,
            "em_tol": em_tol,
            "vote_quorum": vote_quorum,
            "assess_max_utterances": assess_max_utterances,
            "seed": seed,
        },
    )

    models = [read_embeddings(path, model_id=n) for n, path in enumerate(emb)]
    M = check_same_rows(models)
    utterances = read_ids(ids, expected=M)
    source_means = None if source_mean is None else _read_source_means(source_mean, models)

    graph_rows = []

    def dump_iteration(iteration, state):
        edges = state.graph.edge_array()
        graph_rows.append(
            pd.DataFrame({"k": state.k_current, "a": edges[:, 0], "b": edges[:, 1]})
        )

    labels, state = run_pgmvg(
        models,
        utterances,
        run_config,
        threads=threads,
        skip_adaptation=skip_adaptation,
        source_means=source_means,
        iteration_callback=dump_iteration if dump_graph is not None else None,
        record_fits=dump_fits is not None,
    )

    write_labels(out, utterances, labels)
    if history is not None:
        write_table(
            history,
            state.history_frame(),
            header_lines=run_config.to_lines() + ["stop_reason = %s" % state.stop_reason],
        )
    if dump_graph is not None:
        write_table(dump_graph, pd.concat(graph_rows, ignore_index=True))
    if dump_fits is not None:
        columns = ["k", "class_a", "class_b", "model", "mu1", "mu2", "sigma1", "sigma2", "w1"]
        df_fits = pd.DataFrame(
            [asdict(r) for r in state.fit_records], columns=columns + ["verdict", "case"]
        )
        write_table(dump_fits, df_fits)

    typer.echo("classes\t%d" % labels.num_classes)
    typer.echo("coverage\t%.4f" % labels.coverage)


@app.command("eval")
def evaluate_labels(
    pred: Path = typer.Option(..., "--pred", help="Predicted labels TSV"),
    truth: Path = typer.Option(..., "--truth", help="True labels TSV"),
    stats: bool = typer.Option(False, "--stats", help="Also print class size statistics"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Score predicted labels against ground truth."""
    configure_logging(verbose)
    pred_ids, pred_labels = read_labels(pred)
    truth_ids, truth_labels = read_labels(truth)
    aligned_truth = align_by_ids(pred_ids, pred_labels, truth_ids, truth_labels)

    report = evaluate(pred_labels, aligned_truth)
    typer.echo(report.to_frame().to_csv(sep="\t", index=False, float_format="%.4f"), nl=False)

    if stats:
        _, summary = cluster_statistics(pred_labels)
        for key, value in summary.items():
            typer.echo("%s\t%s" % (key, value))


@app.command()
def convert(
    input_path: Path = typer.Option(..., "--input", help=".npy or whitespace-separated text"),
    out: Path = typer.Option(..., "--out", help=".pgmv file to write"),
    has_ids: bool = typer.Option(False, "--has-ids", help="First text column holds identifiers"),
    ids_out: Optional[Path] = typer.Option(None, "--ids-out", help="Identifier sidecar to write"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Convert embeddings from .npy or text to the binary format."""
    configure_logging(verbose)
    utterances = None
    if input_path.suffix.lower() == ".npy":
        if has_ids:
            raise click.UsageError("--has-ids applies to text input only")
        data = np.load(input_path, allow_pickle=False)
    else:
        df = pd.read_csv(input_path, sep=r"\s+", header=None, dtype=str, comment="#")
        if has_ids:
            utterances = UtteranceSet(tuple(df.iloc[:, 0]))
            df = df.iloc[:, 1:]
        try:
            data = df.to_numpy(dtype=np.float64)
        except ValueError:
            raise InvalidEmbeddings("Non-numeric entries in %s." % input_path)

    m = EmbeddingMatrix(data)
    write_embeddings(out, m)
    if ids_out is not None:
        if utterances is None:
            raise click.UsageError("--ids-out requires --has-ids")
        write_ids(ids_out, utterances)
    typer.echo("%d x %d" % (m.rows, m.dim))


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return its exit code."""
    command = typer.main.get_command(app)
    args = sys.argv[1:] if argv is None else list(argv)
    try:
        result = command.main(args=args, prog_name="pgmvg", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return EXIT_USAGE
    except PgmvgConfigError as e:
        click.echo("Configuration error: %s" % e, err=True)
        return EXIT_USAGE
    except (DataFormatError, OSError) as e:
        click.echo("Data error: %s" % e, err=True)
        return EXIT_DATA
    except PgmvgError as e:
        click.echo("Runtime error: %s" % e, err=True)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception("Unexpected failure")
        click.echo("Runtime error: %s" % e, err=True)
        return EXIT_RUNTIME
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
