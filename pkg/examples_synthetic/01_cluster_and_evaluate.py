# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.


import os

import matplotlib.pyplot as plt
import numpy as np

from pgmvg.core_types import RunConfig
from pgmvg.evaluation import cluster_statistics, evaluate
from pgmvg.io_operations.embedding_reader_writer import read_embeddings
from pgmvg.io_operations.text_reader_writer import read_ids, read_labels
from pgmvg.progressive.pgmvg_clustering import run_pgmvg
from pgmvg.utilities import configure_logging


def load_world(name):
    root_dir = os.path.dirname(os.path.abspath(__file__))
    world_dir = os.path.join(root_dir, "worlds", name)
    if not os.path.exists(world_dir):
        raise FileNotFoundError(
            "Please run 00_generate_worlds.py before trying any of the other examples."
        )
    models = []
    while os.path.exists(os.path.join(world_dir, "model%d.pgmv" % (len(models) + 1))):
        path = os.path.join(world_dir, "model%d.pgmv" % (len(models) + 1))
        models.append(read_embeddings(path, model_id=len(models)))
    ids = read_ids(os.path.join(world_dir, "utts.ids"), expected=models[0].rows)
    _, truth = read_labels(os.path.join(world_dir, "truth.tsv"))
    return models, ids, truth


if __name__ == "__main__":
    configure_logging()

    for name in ["balanced", "imbalanced", "with_junk"]:
        models, ids, truth = load_world(name)
        labels, state = run_pgmvg(models, ids, RunConfig())

        print("World '%s', stopped by %s at k=%d" % (name, state.stop_reason, state.k_current))
        print(evaluate(labels, truth).to_frame().to_string(index=False))
        _, summary = cluster_statistics(labels)
        print(summary)

        # Growth of the graph over the iterations
        df_history = state.history_frame()
        fig, ax = plt.subplots(nrows=2, sharex=True)
        ax[0].plot(df_history["k"], df_history["nodes"], "o-", label="nodes in graph")
        ax[0].plot(df_history["k"], df_history["new_nodes"], "o-", label="new nodes")
        ax[0].set_ylabel("utterances")
        ax[0].legend()
        ax[0].grid(True)
        ax[1].plot(df_history["k"], df_history["classes"], "o-", label="classes")
        ax[1].bar(df_history["k"], df_history["merges"], color="tab:green", label="merges")
        ax[1].set_xlabel("k")
        ax[1].legend()
        ax[1].grid(True)
        ax[0].set_title("World '%s'" % name)

        if state.removal is not None:
            removed_junk = np.count_nonzero(truth.label[state.removal.removed] < 0)
            print("Removed %d utterances, %d of them junk" % (len(state.removal), removed_junk))

    plt.show()
