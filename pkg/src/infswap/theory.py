"""Second-moment decay rates of the INS estimator as functions of the schedule.

With ``alphas`` nonincreasing, the inner minimum over permutations pairs the
largest ``alpha`` with the smallest rate. Putting the base-slot rate on top
reduces the decay rate of a probability estimate to a linear program over the
chain ``0 <= I_2 <= ... <= I_K <= I_1 = 1``:

    (2 alpha_1 - alpha_K) + sum_{j>=2} (2 alpha_j - alpha_{j-1}) I_j

whose vertices are the step vectors ``(0, ..., 0, 1, ..., 1)``. For a
risk-sensitive functional the same objective is scaled by the base-slot rate
and ``2 F`` is added.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .weights import MAX_TEMPERATURES, TemperatureSchedule, permutation_table

__all__ = [
    "DecayRateResult",
    "optimal_alpha",
    "rate_bound",
    "v_probability",
    "v_probability_grid_oracle",
    "v_risk",
    "v_risk_grid_oracle",
    "min_permutation_pairing",
    "min_permutation_pairing_bruteforce",
    "default_resolution",
    "alpha_sweep",
    "random_schedule",
]

_GRID_LIMIT = 10**8


@dataclass(frozen=True)
class DecayRateResult:
    value: float
    minimizing_i_vector: tuple
    method: str = "closed_chain"


def _check_k(k: int):
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_TEMPERATURES:
        raise ValueError(f"k must be an integer in 1..{MAX_TEMPERATURES}, got {k!r}")


def _schedule(schedule) -> TemperatureSchedule:
    return schedule if isinstance(schedule, TemperatureSchedule) else TemperatureSchedule(schedule)


def optimal_alpha(k: int) -> TemperatureSchedule:
    """The dyadic schedule ``(1, 1/2, ..., 2**-(k-1))``."""
    _check_k(k)
    return TemperatureSchedule([2.0 ** -j for j in range(k)])


def rate_bound(k: int) -> float:
    """Best attainable decay rate per unit of ``I(A)`` with ``k`` temperatures.

    Equals ``2 - (1/2)**(k-1)``; ``k = 2`` gives the 3/2 of the two-temperature
    analysis.
    """
    _check_k(k)
    return 2.0 - 0.5 ** (k - 1)


def _chain_coefficients(alphas: np.ndarray) -> tuple[float, np.ndarray]:
    head = 2.0 * alphas[0] - alphas[-1]
    coef = 2.0 * alphas[1:] - alphas[:-1]
    return head, coef


def _chain_minimum(alphas: np.ndarray) -> tuple[float, np.ndarray]:
    # vertices: I_2..I_K = (0,...,0,1,...,1); the step position s counts the zeros
    head, coef = _chain_coefficients(alphas)
    m = len(coef)
    best_val, best_s = None, None
    for s in range(m + 1):
        val = head + float(coef[s:].sum())
        if best_val is None or val < best_val:
            best_val, best_s = val, s
    vec = np.ones(m + 1)
    vec[1:1 + best_s] = 0.0
    return best_val, vec


def v_probability(schedule) -> DecayRateResult:
    """Decay rate ``V(alpha)`` of the probability estimator, per unit ``I(A)``."""
    sched = _schedule(schedule)
    value, vec = _chain_minimum(sched.as_array())
    return DecayRateResult(float(value), tuple(float(v) for v in vec), "closed_chain")


def min_permutation_pairing(rates, schedule) -> float:
    """``min over sigma of sum_j alphas[j] * rates[sigma[j]]`` by sorting."""
    sched = _schedule(schedule)
    r = np.asarray(rates, dtype=float)
    if r.shape != (sched.k,):
        raise ValueError(f"rates must have length {sched.k}, got shape {r.shape}")
    return float(np.sort(r) @ sched.as_array())


def min_permutation_pairing_bruteforce(rates, schedule) -> float:
    sched = _schedule(schedule)
    r = np.asarray(rates, dtype=float)
    if r.shape != (sched.k,):
        raise ValueError(f"rates must have length {sched.k}, got shape {r.shape}")
    return float((r[permutation_table(sched.k)] @ sched.as_array()).min())


def default_resolution(k: int) -> float:
    return 1e-3 if k <= 3 else 1e-2


def _grid_objective_min(alphas: np.ndarray, top: float, resolution: float, extra: float = 0.0) -> float:
    # brute force over I_2..I_K on {0, res*top, ..., top}, I_1 = top
    k = len(alphas)
    if k == 1:
        return float(2 * alphas[0] * top - alphas[0] * top + extra)
    n = int(round(1.0 / resolution))
    if abs(n * resolution - 1.0) > 1e-9:
        raise ValueError(f"resolution must divide 1, got {resolution}")
    points = (n + 1) ** (k - 1)
    if points > _GRID_LIMIT:
        raise ValueError(f"grid too large: {points} points (limit {_GRID_LIMIT})")
    axis = np.linspace(0.0, top, n + 1)
    best = np.inf
    # iterate over the first free coordinate, vectorise the rest
    rest = k - 2
    if rest:
        tail = np.array(np.meshgrid(*([axis] * rest), indexing="ij")).reshape(rest, -1).T
    else:
        tail = np.zeros((1, 0))
    for v in axis:
        full = np.empty((tail.shape[0], k))
        full[:, 0] = top
        full[:, 1] = v
        full[:, 2:] = tail
        obj = 2.0 * (full @ alphas) - np.sort(full, axis=1) @ alphas + extra
        best = min(best, float(obj.min()))
    return best


def v_probability_grid_oracle(schedule, resolution: float | None = None) -> float:
    """Brute-force ``V(alpha)`` on a grid; independent of the chain reduction."""
    sched = _schedule(schedule)
    if resolution is None:
        resolution = default_resolution(sched.k)
    if not 0 < resolution <= 0.05:
        raise ValueError(f"resolution must be in (0, 0.05], got {resolution}")
    return _grid_objective_min(sched.as_array(), 1.0, resolution)


def _candidates(d) -> np.ndarray:
    pairs = np.asarray(d, dtype=float).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise ValueError("candidate set is empty")
    if not np.isfinite(pairs).all():
        raise ValueError("candidate set entries must be finite")
    if (pairs[:, 0] < 0).any():
        raise ValueError("candidate rates must be >= 0")
    return pairs


def v_risk(schedule, d) -> DecayRateResult:
    """``V_F(alpha)`` over a finite set of ``(I, F)`` candidate points.

    Per candidate the chain objective is positively homogeneous in the rate
    vector, so its minimum is ``i1 * V(alpha) + 2 f``.
    """
    sched = _schedule(schedule)
    pairs = _candidates(d)
    v, vec = _chain_minimum(sched.as_array())
    vals = pairs[:, 0] * v + 2.0 * pairs[:, 1]
    best = int(np.argmin(vals))
    return DecayRateResult(float(vals[best]), tuple(float(x) for x in pairs[best, 0] * vec), "closed_chain")


def v_risk_grid_oracle(schedule, d, resolution: float | None = None) -> float:
    sched = _schedule(schedule)
    pairs = _candidates(d)
    if resolution is None:
        resolution = default_resolution(sched.k)
    a = sched.as_array()
    return min(_grid_objective_min(a, i1, resolution, 2.0 * f) for i1, f in pairs)


def alpha_sweep(values, k: int = 2) -> np.ndarray:
    """``V`` along schedules ``(1, a, a, ..., a)``; handy for plots."""
    return np.array([v_probability([1.0] + [a] * (k - 1)).value for a in values])


def random_schedule(rng: np.random.Generator, k: int) -> TemperatureSchedule:
    tail = np.sort(rng.uniform(0.0, 1.0, size=k - 1))[::-1]
    return TemperatureSchedule(np.concatenate([[1.0], tail]))
