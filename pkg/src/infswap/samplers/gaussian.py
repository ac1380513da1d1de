"""Scaled Gaussian random walk ``X = eps * sum_{i <= floor(1/eps)} xi_i``.

The sum of ``floor(1/eps)`` standard normals is drawn directly as a single
normal with variance ``eps**2 * floor(1/eps)``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

from .. import rng
from .base import Draw, RateModel

LOWER = -0.25
UPPER = 0.2


def walk_std(epsilon: float) -> float:
    return epsilon * math.sqrt(math.floor(1.0 / epsilon))


def in_target(x):
    """Membership in ``(-inf, -0.25] U [0.2, inf)``."""
    return (x <= LOWER) | (x >= UPPER)


def exact_probability(epsilon: float) -> float:
    s = walk_std(epsilon)
    return float(ndtr(LOWER / s) + ndtr(-UPPER / s))


def gaussian_walk_draw(epsilon_eff: float, stream, epsilon_base: float | None = None):
    x = walk_std(epsilon_eff) * stream.normal()
    return x, 0.5 * x * x, bool(in_target(x))


def gaussian_nd_draw(epsilon_eff: float, d: int, stream):
    if d < 1:
        raise ValueError("dimension must be >= 1")
    x = walk_std(epsilon_eff) * stream.normal(d)
    return x, 0.5 * float((x * x).sum()), bool(in_target(x[0]))


class GaussianWalk(RateModel):
    """``d`` independent walks; the target set only looks at the first one."""

    name = "gaussian"

    def __init__(self, dim: int = 1):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = int(dim)

    def draw(self, epsilon_eff, stream, epsilon=None):
        if self.dimension == 1:
            x, r, hit = gaussian_walk_draw(epsilon_eff, stream)
        else:
            x, r, hit = gaussian_nd_draw(epsilon_eff, self.dimension, stream)
        return Draw(x, r, hit)

    def draw_trials(self, seed, trials, epsilon, schedule):
        trials = np.asarray(trials, dtype=np.int64)
        rates = np.empty((len(trials), schedule.k))
        hits = np.empty((len(trials), schedule.k), dtype=bool)
        for j, a in enumerate(schedule.alphas):
            x = walk_std(epsilon / a) * rng.normals(seed, trials, j, self.dimension)
            rates[:, j] = 0.5 * (x * x).sum(axis=1)
            hits[:, j] = in_target(x[:, 0])
        return rates, hits

    def analytic_truth(self, epsilon):
        return exact_probability(epsilon)

    def config(self):
        return {"dim": self.dimension}
