# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.


import numpy as np
import pandas as pd

from pgmvg.baseline import kmeans_pseudo_labels
from pgmvg.core_types import RunConfig
from pgmvg.evaluation import evaluate
from pgmvg.progressive.pgmvg_clustering import prepare_embeddings, run_pgmvg
from pgmvg.synthetic_data import SynthSpec, generate

# Compare voting over all models against every model on its own, and both
# against k-means with the true number of speakers, on balanced and
# imbalanced worlds with noisier models.

if __name__ == "__main__":
    worlds = {
        "balanced": SynthSpec(model_noise=0.25),
        "imbalanced": SynthSpec(num_speakers=30, utts_per_speaker=(10, 120), model_noise=0.25),
    }
    config = RunConfig()

    rows = []
    for name, spec in worlds.items():
        models, ids, truth = generate(spec)

        labels, state = run_pgmvg(models, ids, config)
        report = evaluate(labels, truth)
        rows.append([name, "voting (N=%d)" % len(models), report.pairwise_f, report.nmi,
                     report.coverage, sum(r.rejected_edges for r in state.history)])

        for m in models:
            labels, state = run_pgmvg([m], ids, config)
            report = evaluate(labels, truth)
            rows.append([name, "model %d alone" % m.model_id, report.pairwise_f, report.nmi,
                         report.coverage, sum(r.rejected_edges for r in state.history)])

        num_speakers = int(np.unique(truth).size)
        for m in prepare_embeddings(models):
            labels = kmeans_pseudo_labels(m, num_speakers, seed=0)
            report = evaluate(labels, truth)
            rows.append([name, "k-means, model %d" % m.model_id, report.pairwise_f, report.nmi,
                         report.coverage, np.nan])

    df = pd.DataFrame(
        rows, columns=["world", "method", "pairwise_f", "nmi", "coverage", "rejected_edges"]
    )
    print(df.to_string(index=False, float_format="%.3f"))
