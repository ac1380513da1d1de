"""Four-dimensional Gibbs measure ``exp(-I(x)/eps) dx`` sampled by Metropolis-Hastings.

Proposal: pick a coordinate uniformly, move it by ``eps * U`` with ``U`` uniform
on ``[-1, 1]``; the chain is thinned to every ``ceil(8/eps)`` steps.

Chains are keyed by trial block (see ``estimator.TRIAL_BLOCK``) and slot:
each block restarts one chain per temperature from the mode, burns it in and
then emits one thinned state per trial. The output therefore depends on
``(seed, block, slot)`` only and is identical for any number of workers.
"""
from __future__ import annotations

import math

import numba
import numpy as np
from scipy.integrate import quad

from .. import rng
from .base import Draw, RateModel

SHIFT = 2.64
X_MODE = np.array([0.0, -0.5, 0.0, -0.25])
DEFAULT_BURN_IN = 100_000

# slot namespace for chain streams, disjoint from per-trial slots
_CHAIN_SLOT = 1 << 40
# uniforms generated per call to the step kernel
_U_BATCH = 1 << 18


@numba.njit(cache=True, nogil=True)
def _rate(x0, x1, x2, x3):
    s = x0 * x0 + x1 * x1 + x1 + 1.0 + x2 ** 4 + 2.0 * x3 * x3 + x3 + 1.0
    return s * s - SHIFT


def rate_4d(x) -> float:
    """``(x1^2 + x2^2 + x2 + 1 + x3^4 + 2 x4^2 + x4 + 1)^2 - 2.64``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 4:
        raise ValueError("rate_4d expects 4-vectors")
    s = x[..., 0] ** 2 + x[..., 1] ** 2 + x[..., 1] + 1.0 + x[..., 2] ** 4 + 2.0 * x[..., 3] ** 2 + x[..., 3] + 1.0
    return s * s - SHIFT


def in_a1(x):
    x = np.asarray(x, dtype=float)
    return (x[..., 0] <= -0.1) & (x[..., 1] >= -0.35) & (x[..., 2] >= 0.0) & (x[..., 3] >= -0.2)


def in_a2(x, rate=None):
    return (rate_4d(x) if rate is None else rate) >= 0.5


TARGETS = {"A1": in_a1, "A2": lambda x: in_a2(x)}


def exact_probability_a2(epsilon: float) -> float:
    """``mu^eps(I >= 0.5)`` by one-dimensional quadrature.

    ``I = (1.625 + q)^2 - 2.64`` with
    ``q = x1^2 + (x2 + 1/2)^2 + x3^4 + 2 (x4 + 1/4)^2``. The volume of
    ``{q <= Q}`` scales as ``Q^(7/4)``, so ``q`` has Lebesgue density
    proportional to ``q^(3/4)``.
    """
    q0 = math.sqrt(0.5 + SHIFT) - 1.625
    base = (1.625 + q0) ** 2

    def dens(q):
        return q ** 0.75 * math.exp(-((1.625 + q) ** 2 - base) / epsilon)

    inside = quad(dens, q0, math.inf, epsabs=0, epsrel=1e-12, limit=200)[0]
    outside = quad(dens, 0.0, q0, epsabs=0, epsrel=1e-12, limit=200)[0]
    return inside / (inside + outside)


def thinning(epsilon_eff: float) -> int:
    # guard against 8/0.05 = 160.00000000000003
    return max(1, math.ceil(8.0 / epsilon_eff - 1e-9))


@numba.njit(cache=True, nogil=True)
def _mh_steps(x, epsilon, u, n_steps, thin, out):
    # u holds 3 uniforms per step: coordinate, displacement, acceptance
    cur = _rate(x[0], x[1], x[2], x[3])
    accepted = 0
    k = 0
    for s in range(n_steps):
        c = int(u[3 * s] * 4.0)
        step = epsilon * (2.0 * u[3 * s + 1] - 1.0)
        old = x[c]
        x[c] = old + step
        new = _rate(x[0], x[1], x[2], x[3])
        d = new - cur
        if d <= 0.0 or u[3 * s + 2] < math.exp(-d / epsilon):
            cur = new
            accepted += 1
        else:
            x[c] = old
        if thin > 0 and (s + 1) % thin == 0:
            out[k, 0] = x[0]
            out[k, 1] = x[1]
            out[k, 2] = x[2]
            out[k, 3] = x[3]
            k += 1
    return accepted


class MetropolisChain:
    """Random-walk Metropolis chain at one temperature, fed by one substream."""

    def __init__(self, epsilon_eff: float, stream, x0=None):
        self.epsilon = float(epsilon_eff)
        self.stream = stream
        self.x = np.array(X_MODE if x0 is None else x0, dtype=float)
        self.thin = thinning(self.epsilon)
        self.steps = 0
        self.accepted = 0

    def advance(self, n_steps: int) -> None:
        """Run ``n_steps`` accept/reject steps without recording states."""
        dummy = np.empty((0, 4))
        while n_steps > 0:
            m = min(n_steps, _U_BATCH // 3)
            u = self.stream.uniform(3 * m)
            self.accepted += _mh_steps(self.x, self.epsilon, u, m, 0, dummy)
            self.steps += m
            n_steps -= m

    def sample(self, n: int) -> np.ndarray:
        """``n`` thinned states, ``thin`` steps apart, shape ``(n, 4)``."""
        out = np.empty((n, 4))
        per_call = max(1, (_U_BATCH // 3) // self.thin)
        done = 0
        while done < n:
            m = min(per_call, n - done)
            u = self.stream.uniform(3 * m * self.thin)
            self.accepted += _mh_steps(self.x, self.epsilon, u, m * self.thin, self.thin, out[done:done + m])
            self.steps += m * self.thin
            done += m
        return out

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.steps if self.steps else float("nan")


def mh_gibbs_draw(epsilon_eff: float, stream, chain_state: MetropolisChain | None):
    """Advance the chain one thinning interval; returns ``(x, rate, (in_A1, in_A2))``."""
    if chain_state is None:
        raise ValueError("chain is not initialised")
    x = chain_state.sample(1)[0]
    r = float(rate_4d(x))
    return x, r, (bool(in_a1(x)), bool(in_a2(x, r)))


class GibbsModel(RateModel):
    name = "gibbs4d"
    dimension = 4

    def __init__(self, target: str = "A2", burn_in: int = DEFAULT_BURN_IN, block: int | None = None):
        if target not in TARGETS:
            raise ValueError(f"unknown target set {target!r}; choose from {sorted(TARGETS)}")
        self.target = target
        self.burn_in = int(burn_in)
        self.block = block

    def _block_size(self):
        if self.block is not None:
            return self.block
        from ..estimator import TRIAL_BLOCK
        return TRIAL_BLOCK

    def chain(self, seed: int, block: int, slot: int, epsilon_eff: float) -> MetropolisChain:
        c = MetropolisChain(epsilon_eff, rng.derive_substream(seed, block, _CHAIN_SLOT | slot))
        c.advance(self.burn_in)
        return c

    def draw(self, epsilon_eff, stream, epsilon=None):
        raise TypeError("Gibbs samples come from a chain; use mh_gibbs_draw or draw_trials")

    def draw_trials(self, seed, trials, epsilon, schedule):
        trials = np.asarray(trials, dtype=np.int64)
        size = self._block_size()
        first = int(trials[0])
        if first % size or np.any(np.diff(trials) != 1) or (first // size) != (int(trials[-1]) // size):
            raise ValueError("Gibbs trials must be requested as a contiguous run inside one block")
        block = first // size
        n = len(trials)
        rates = np.empty((n, schedule.k))
        hits = np.empty((n, schedule.k), dtype=bool)
        member = TARGETS[self.target]
        for j, a in enumerate(schedule.alphas):
            x = self.chain(seed, block, j, epsilon / a).sample(n)
            rates[:, j] = rate_4d(x)
            hits[:, j] = member(x)
        return rates, hits

    def analytic_truth(self, epsilon):
        return exact_probability_a2(epsilon) if self.target == "A2" else None

    def config(self):
        return {"set": self.target, "burn_in": self.burn_in}
