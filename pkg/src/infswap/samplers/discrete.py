from __future__ import annotations

import numpy as np

from .. import rng
from .base import Draw, RateModel


class DiscreteModel(RateModel):
    """Finitely many atoms with ``mu^eps(m) proportional to exp(-I_m / eps)``.

    Small enough to enumerate every K-tuple, which makes it the reference
    model for exact unbiasedness checks.
    """

    name = "discrete"

    def __init__(self, rates, in_a):
        self.rates = np.asarray(rates, dtype=float)
        self.in_a = np.asarray(in_a, dtype=bool)
        if self.rates.shape != self.in_a.shape or self.rates.ndim != 1:
            raise ValueError("rates and in_a must be 1-D of equal length")

    def probabilities(self, epsilon: float) -> np.ndarray:
        logp = -self.rates / epsilon
        p = np.exp(logp - logp.max())
        return p / p.sum()

    def exact_probability(self, epsilon: float) -> float:
        return float(self.probabilities(epsilon)[self.in_a].sum())

    def _pick(self, u, epsilon_eff):
        cdf = np.cumsum(self.probabilities(epsilon_eff))
        return np.minimum(np.searchsorted(cdf, u, side="right"), len(self.rates) - 1)

    def draw(self, epsilon_eff, stream, epsilon=None):
        m = int(self._pick(stream.uniform(), epsilon_eff))
        return Draw(m, float(self.rates[m]), bool(self.in_a[m]))

    def draw_trials(self, seed, trials, epsilon, schedule):
        trials = np.asarray(trials, dtype=np.int64)
        idx = np.empty((len(trials), schedule.k), dtype=np.intp)
        for j, a in enumerate(schedule.alphas):
            idx[:, j] = self._pick(rng.uniforms(seed, trials, j, 1)[:, 0], epsilon / a)
        return self.rates[idx], self.in_a[idx]

    def analytic_truth(self, epsilon):
        return self.exact_probability(epsilon)
