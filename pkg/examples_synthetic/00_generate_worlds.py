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

from pgmvg.io_operations.embedding_reader_writer import write_embeddings
from pgmvg.io_operations.text_reader_writer import write_ids, write_labels
from pgmvg.core_types import PseudoLabels
from pgmvg.synthetic_data import SynthSpec, generate
from pgmvg.utilities import configure_logging


def save_world(name, spec):
    root_dir = os.path.dirname(os.path.abspath(__file__))
    out_dir = os.path.join(root_dir, "worlds", name)
    os.makedirs(out_dir, exist_ok=True)

    models, ids, truth = generate(spec)
    for n, m in enumerate(models, start=1):
        write_embeddings(os.path.join(out_dir, "model%d.pgmv" % n), m)
    write_ids(os.path.join(out_dir, "utts.ids"), ids)
    write_labels(os.path.join(out_dir, "truth.tsv"), ids, PseudoLabels(truth))
    print("Saved %d utterances from %d models to %s" % (len(ids), len(models), out_dir))


if __name__ == "__main__":
    configure_logging()

    # 50 speakers with 40 utterances each, seen by 3 rotated, noisy models
    save_world("balanced", SynthSpec())

    # 30 speakers with 10 to 120 utterances each
    save_world("imbalanced", SynthSpec(num_speakers=30, utts_per_speaker=(10, 120)))

    # Balanced world with 5% near-duplicate junk for the high-degree filter
    save_world("with_junk", SynthSpec(outlier_frac=0.05, seed=1))
