# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.


import matplotlib.pyplot as plt
import numpy as np

from pgmvg.assessment.double_gaussian import fit_double_gaussian
from pgmvg.assessment.merge_decision import collect_scores, decide_merge
from pgmvg.core_types import RunConfig
from pgmvg.progressive.pgmvg_clustering import prepare_embeddings
from pgmvg.synthetic_data import SynthSpec, generate
from pgmvg.visualization import plot_double_gaussian_fit

# Show the score distributions the merge assessment sees: one speaker split
# in two halves, and two different speakers.

if __name__ == "__main__":
    config = RunConfig()
    models, _, truth = generate(SynthSpec(num_speakers=10, model_count=1))
    m = prepare_embeddings(models)[0]

    speaker_0 = np.flatnonzero(truth == 0)
    speaker_1 = np.flatnonzero(truth == 1)
    pairs = {
        "same speaker, split in two": [speaker_0[::2], speaker_0[1::2]],
        "two different speakers": [speaker_0, speaker_1],
    }

    fig, axarr = plt.subplots(ncols=2, figsize=(12, 5))
    for ax, (title, subclasses) in zip(axarr, pairs.items()):
        scores = collect_scores(subclasses, m)
        fit = fit_double_gaussian(scores, sigma_floor=config.sigma_floor)
        decision = decide_merge(fit, config.th_high, config.th_low, config.epsilon)
        plot_double_gaussian_fit(
            scores, fit, decision, ax=ax, th_high=config.th_high, th_low=config.th_low
        )
        ax.set_xlabel("cosine similarity (%s)" % title)

    plt.tight_layout()
    plt.show()
