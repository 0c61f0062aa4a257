# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.


import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from ..exceptions import TooFewScores

logger = logging.getLogger(__name__)

# Responsibility mass under which a component keeps its previous parameters
MIN_COMPONENT_MASS = 1e-10


@dataclass(frozen=True)
class GaussianPairFit:
    """Two-component 1-D Gaussian mixture, ordered so that mu1 >= mu2."""

    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    w1: float
    w2: float
    log_likelihood: float = float("nan")
    iterations: int = 0
    log_likelihood_trace: Tuple[float, ...] = field(default=(), compare=False, repr=False)

    def as_dict(self) -> dict:
        return {
            "mu1": self.mu1,
            "mu2": self.mu2,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "w1": self.w1,
        }

    def pdf(self, x: np.ndarray) -> np.ndarray:
        """Mixture density at x."""
        x = np.asarray(x, dtype=float)
        return self.w1 * norm.pdf(x, self.mu1, self.sigma1) + self.w2 * norm.pdf(
            x, self.mu2, self.sigma2
        )


def _e_step(x, mu, sigma, w):
    with np.errstate(divide="ignore"):
        log_w = np.log(w)
    log_joint = log_w[:, None] + norm.logpdf(x[None, :], mu[:, None], sigma[:, None])
    log_total = logsumexp(log_joint, axis=0)
    return np.exp(log_joint - log_total[None, :]), float(np.sum(log_total))


def _m_step(x, resp, mu, sigma, sigma_floor):
    mass = resp.sum(axis=1)
    w = mass / x.size
    new_mu = mu.copy()
    new_sigma = sigma.copy()
    for c in range(2):
        if mass[c] < MIN_COMPONENT_MASS:
            continue
        new_mu[c] = np.dot(resp[c], x) / mass[c]
        variance = np.dot(resp[c], (x - new_mu[c]) ** 2) / mass[c]
        new_sigma[c] = max(np.sqrt(variance), sigma_floor)
    return new_mu, new_sigma, w


def fit_double_gaussian(
    scores: np.ndarray,
    sigma_floor: float = 1e-4,
    max_iters: int = 200,
    tol: float = 1e-6,
) -> GaussianPairFit:
    """Fit a two-component Gaussian mixture to 1-D scores by EM.

    Scores are sorted first and split at the median: the upper half seeds
    component 1, the lower half component 2. No randomness is involved, so
    the fit depends only on the multiset of scores.

    Args:
        scores (np.ndarray): At least 4 similarity scores
        sigma_floor (float, optional): Lower bound of both standard
            deviations. Defaults to 1e-4.
        max_iters (int, optional): Maximum number of EM iterations.
            Defaults to 200.
        tol (float, optional): Stop once the relative log-likelihood
            improvement falls below tol. Defaults to 1e-6.

    Returns:
        GaussianPairFit: Fitted parameters with mu1 >= mu2.

    Raises:
        TooFewScores: If fewer than 4 scores are given.
    """
    x = np.sort(np.asarray(scores, dtype=np.float64).ravel())
    if x.size < 4:
        raise TooFewScores(int(x.size))

    half = x.size // 2
    upper, lower = x[half:], x[:half]
    mu = np.array([upper.mean(), lower.mean()])
    sigma = np.maximum(np.array([upper.std(), lower.std()]), sigma_floor)
    w = np.array([upper.size, lower.size], dtype=np.float64) / x.size

    resp, ll = _e_step(x, mu, sigma, w)
    trace = [ll]
    iterations = 0
    for iterations in range(1, max_iters + 1):
        mu, sigma, w = _m_step(x, resp, mu, sigma, sigma_floor)
        resp, ll_new = _e_step(x, mu, sigma, w)
        trace.append(ll_new)
        improvement = (ll_new - ll) / max(abs(ll), 1.0)
        ll = ll_new
        if improvement < tol:
            break

    if mu[0] < mu[1]:
        mu, sigma, w = mu[::-1], sigma[::-1], w[::-1]

    return GaussianPairFit(
        mu1=float(mu[0]),
        mu2=float(mu[1]),
        sigma1=float(sigma[0]),
        sigma2=float(sigma[1]),
        w1=float(w[0]),
        w2=float(1.0 - w[0]),
        log_likelihood=float(ll),
        iterations=iterations,
        log_likelihood_trace=tuple(trace),
    )
