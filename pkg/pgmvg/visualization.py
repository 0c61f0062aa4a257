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
import scipy.stats as st
from matplotlib import pyplot as plt

from .assessment.double_gaussian import GaussianPairFit
from .assessment.merge_decision import MergeDecision


def plot_double_gaussian_fit(
    scores,
    fit: GaussianPairFit,
    decision: MergeDecision = None,
    ax=None,
    bins=50,
    th_high=None,
    th_low=None,
):
    """
    Plot assessment scores as a density histogram with both fitted
    components and their mixture on top.

    Args:
        scores (np.array): similarity scores the fit was made on.
        fit (GaussianPairFit): fitted double Gaussian.
        decision (MergeDecision, optional): decision to print in the title.
            Defaults to None.
        ax (:py:class:`matplotlib.pyplot.axes`, optional):
            axes handle for plotting. Defaults to None.
        bins (int, optional): number of histogram bins. Defaults to 50.
        th_high (float, optional): draw the th_high threshold. Defaults to None.
        th_low (float, optional): draw the th_low threshold. Defaults to None.

    Returns:
        ax: the axes plotted on.
    """
    scores = np.asarray(scores, dtype=float)
    if len(scores) == 0:
        raise ValueError("scores is empty")

    if ax is None:
        _, ax = plt.subplots()

    ax.hist(scores, bins=bins, density=True, color="lightgray", label="scores")

    x = np.linspace(min(scores.min(), -1.0), max(scores.max(), 1.0), 500)
    df = pd.DataFrame(
        {
            "x": x,
            "component 1": fit.w1 * st.norm.pdf(x, fit.mu1, fit.sigma1),
            "component 2": fit.w2 * st.norm.pdf(x, fit.mu2, fit.sigma2),
        }
    )
    df["mixture"] = df["component 1"] + df["component 2"]

    ax.plot(df["x"], df["component 1"], color="tab:blue", label="component 1")
    ax.plot(df["x"], df["component 2"], color="tab:orange", label="component 2")
    ax.plot(df["x"], df["mixture"], color="k", linestyle="--", label="mixture")

    for threshold, name in ((th_high, "th_high"), (th_low, "th_low")):
        if threshold is not None:
            ax.axvline(threshold, color="tab:red", linestyle=":", label=name)

    title = "mu1=%.3f mu2=%.3f w1=%.2f" % (fit.mu1, fit.mu2, fit.w1)
    if decision is not None:
        title = "%s (%s): %s" % (decision.verdict.value, decision.case_tag.value, title)
    ax.set_title(title)
    ax.set_xlabel("cosine similarity")
    ax.set_ylabel("density")
    ax.legend()
    ax.grid(True)
    return ax
