# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.

# These functions time fixed workloads on a fixed synthetic world, so timings
# stay comparable even when the engine changes internally.

import time

import numpy as np

from pgmvg.core_types import RunConfig
from pgmvg.knn import build_neighbor_tables
from pgmvg.progressive.pgmvg_clustering import prepare_embeddings, run_pgmvg
from pgmvg.synthetic_data import SynthSpec, generate

N_ITERATIONS = 5


def make_world(num_speakers=50, utts_per_speaker=40, model_count=3):
    spec = SynthSpec(
        num_speakers=num_speakers,
        utts_per_speaker=utts_per_speaker,
        model_count=model_count,
        seed=0,
    )
    return generate(spec)


# Time the neighbor tables of all models at the default k_max
def time_neighbor_tables(threads=1):
    models, _, _ = make_world()
    models = prepare_embeddings(models)
    k_max = RunConfig().k_max

    time_results = np.zeros(N_ITERATIONS)
    for i in range(N_ITERATIONS):
        start_time = time.time()
        _ = build_neighbor_tables(models, None, k_max, threads=threads)
        end_time = time.time()
        time_results[i] = end_time - start_time

    return np.mean(time_results)


# Time a full clustering run on 2000 utterances and 3 models
def time_full_clustering(threads=1):
    models, ids, _ = make_world()

    time_results = np.zeros(N_ITERATIONS)
    for i in range(N_ITERATIONS):
        start_time = time.time()
        _ = run_pgmvg(models, ids, RunConfig(), threads=threads)
        end_time = time.time()
        time_results[i] = end_time - start_time

    return np.mean(time_results)


if __name__ == "__main__":
    print("neighbor tables: %.3f s" % time_neighbor_tables())
    print("full clustering: %.3f s" % time_full_clustering())
