"""Geometric variables as a discretised exponential.

``X = eps * K`` with ``K`` geometric on ``{1, 2, ...}`` is written as
``f_eps(Y) = eps * (floor(Y / eps) + 1)`` with ``Y`` exponential of rate
``lambda / eps`` and ``lambda = -log(1 - p)``. ``Y`` has the exact Gibbs form
with rate function ``I(y) = lambda * y``, so INS weights are computed on ``Y``
while the target is evaluated on ``f_eps(Y)`` at the base temperature.
"""
from __future__ import annotations

import math

import numpy as np

from .. import rng
from .base import Draw, RateModel


def geometric_lambda(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    return -math.log1p(-p)


def discretize(y, epsilon: float):
    return epsilon * (np.floor(y / epsilon) + 1.0)


def _exponential(u, epsilon: float, lam: float):
    # u in [0, 1) so 1 - u is in (0, 1]
    return -(epsilon / lam) * np.log1p(-u)


def geometric_via_exponential(epsilon: float, p: float, stream):
    """One draw: returns ``(x_eps, y, lambda)``; ``x_eps / eps`` is Geometric(p)."""
    lam = geometric_lambda(p)
    y = float(_exponential(stream.uniform(), epsilon, lam))
    return float(discretize(y, epsilon)), y, lam


class GeometricModel(RateModel):
    """Rare events of ``X = eps * Geometric(p)``.

    Indicator mode targets ``{X >= threshold}``; risk mode estimates
    ``E exp(-G(X) / eps)`` with ``G(x) = slope * |x - threshold|``.
    """

    name = "geometric"

    def __init__(self, p: float = 0.5, threshold: float = 1.0, mode: str = "indicator",
                 slope: float = 1.0):
        self.p = float(p)
        self.lam = geometric_lambda(p)
        self.threshold = float(threshold)
        if mode not in ("indicator", "risk"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.slope = float(slope)

    def _payload(self, y, epsilon):
        x = discretize(y, epsilon)
        if self.mode == "indicator":
            return x >= self.threshold
        return self.slope * np.abs(x - self.threshold)

    def draw(self, epsilon_eff, stream, epsilon=None):
        y = float(_exponential(stream.uniform(), epsilon_eff, self.lam))
        base = epsilon_eff if epsilon is None else epsilon
        return Draw(y, self.lam * y, self._payload(y, base).item())

    def draw_trials(self, seed, trials, epsilon, schedule):
        trials = np.asarray(trials, dtype=np.int64)
        y = np.empty((len(trials), schedule.k))
        for j, a in enumerate(schedule.alphas):
            y[:, j] = _exponential(rng.uniforms(seed, trials, j, 1)[:, 0], epsilon / a, self.lam)
        return self.lam * y, self._payload(y, epsilon)

    def analytic_truth(self, epsilon):
        q = 1.0 - self.p
        if self.mode == "indicator":
            # smallest k with eps * k >= threshold, using the same float test as the sampler
            k = max(1, math.ceil(self.threshold / epsilon) - 1)
            while epsilon * k < self.threshold:
                k += 1
            while k > 1 and epsilon * (k - 1) >= self.threshold:
                k -= 1
            return q ** (k - 1)
        # E exp(-slope * |k - threshold/eps|), summed until the geometric tail is negligible
        n = int(self.threshold / epsilon + 60.0 / min(self.lam, 1.0) + 60.0 / max(self.slope, 1e-3)) + 10
        k = np.arange(1, n + 1, dtype=float)
        terms = self.p * q ** (k - 1) * np.exp(-self.slope * np.abs(epsilon * k - self.threshold) / epsilon)
        return math.fsum(terms)

    def config(self):
        return {"p": self.p, "threshold": self.threshold, "slope": self.slope}
