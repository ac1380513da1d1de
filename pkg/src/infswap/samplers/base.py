from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..rng import derive_substream


@dataclass
class Draw:
    point: Any
    rate: float
    payload: Any


class RateModel:
    """A sampling source paired with its rate function and target payload.

    Subclasses implement :meth:`draw` (one sample at temperature
    ``epsilon_eff`` from a substream) and may override :meth:`draw_trials`
    with a vectorised path that must reproduce the generic loop exactly.
    Slot ``j`` of trial ``t`` reads the substream ``(seed, t, j)``.
    """

    name = "model"
    dimension = 1
    mode = "indicator"
    rate_kind = "full"

    def draw(self, epsilon_eff: float, stream, epsilon: float | None = None) -> Draw:
        raise NotImplementedError

    def draw_trials(self, seed: int, trials, epsilon: float, schedule):
        trials = np.asarray(trials, dtype=np.int64)
        k = schedule.k
        rates = np.empty((len(trials), k))
        payload = np.empty((len(trials), k), dtype=bool if self.mode == "indicator" else float)
        for i, t in enumerate(trials):
            for j, a in enumerate(schedule.alphas):
                d = self.draw(epsilon / a, derive_substream(seed, int(t), j), epsilon)
                rates[i, j] = d.rate
                payload[i, j] = d.payload
        return rates, payload

    def analytic_truth(self, epsilon: float) -> float | None:
        return None

    def config(self) -> dict:
        return {}
