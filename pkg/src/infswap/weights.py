"""Infinite-swapping weights over the K! permutations of a sample tuple.

For a tuple ``x = (x_1, ..., x_K)`` with rate values ``I(x_j)`` and a
temperature schedule ``alphas``, permutation ``sigma`` gets the weight

    exp(-(1/eps) * sum_j alphas[j] * I(x[sigma[j]]))

normalised over all permutations. Everything is evaluated in the log domain
with the maximum exponent subtracted, so tiny temperatures do not underflow.
Permutations are indexed in lexicographic order (``itertools.permutations``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "MAX_TEMPERATURES",
    "TemperatureSchedule",
    "PermutationWeights",
    "permutation_table",
    "permutation_log_numerators",
    "permutation_weights",
    "first_slot_weights",
    "first_slot_unnormalized",
    "two_temperature_weight",
    "weights_from_log_densities",
]

MAX_TEMPERATURES = 8


@dataclass(frozen=True)
class TemperatureSchedule:
    """Nonincreasing vector ``1 = alphas[0] >= alphas[1] >= ... >= 0``.

    Slot ``j`` samples at temperature ``eps / alphas[j]``.
    """

    alphas: tuple

    def __init__(self, alphas):
        values = tuple(float(a) for a in np.atleast_1d(np.asarray(alphas, dtype=float)))
        object.__setattr__(self, "alphas", values)
        self._validate()

    def _validate(self):
        a = self.alphas
        if not 1 <= len(a) <= MAX_TEMPERATURES:
            raise ValueError(f"schedule length must be in 1..{MAX_TEMPERATURES}, got {len(a)}")
        if any(not math.isfinite(v) for v in a):
            raise ValueError("schedule entries must be finite")
        if a[0] != 1.0:
            raise ValueError(f"alphas[0] must be exactly 1, got {a[0]!r}")
        for j in range(len(a) - 1):
            if a[j + 1] > a[j]:
                raise ValueError(f"schedule not nonincreasing at index {j + 1}: {a[j]} < {a[j + 1]}")
        if a[-1] < 0.0:
            raise ValueError("schedule entries must be >= 0")

    @property
    def k(self) -> int:
        return len(self.alphas)

    def as_array(self) -> np.ndarray:
        return np.array(self.alphas)

    def __len__(self):
        return len(self.alphas)


@dataclass(frozen=True)
class PermutationWeights:
    """Normalised weights in lexicographic permutation order."""

    weights: np.ndarray
    epsilon: float | None = None

    @property
    def k(self) -> int:
        return _k_from_factorial(len(self.weights))


def _k_from_factorial(n: int) -> int:
    for k in range(1, MAX_TEMPERATURES + 1):
        if math.factorial(k) == n:
            return k
    raise ValueError(f"{n} is not a factorial of 1..{MAX_TEMPERATURES}")


@lru_cache(maxsize=None)
def permutation_table(k: int) -> np.ndarray:
    """All permutations of ``range(k)`` as rows, in lexicographic order."""
    if not 1 <= k <= MAX_TEMPERATURES:
        raise ValueError(f"K must be in 1..{MAX_TEMPERATURES}, got {k}")
    table = np.array(list(itertools.permutations(range(k))), dtype=np.intp)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def _first_slot_indicator(k: int) -> np.ndarray:
    # (K!, K) matrix with a 1 where sigma[0] == i
    perms = permutation_table(k)
    ind = np.zeros((len(perms), k))
    ind[np.arange(len(perms)), perms[:, 0]] = 1.0
    ind.setflags(write=False)
    return ind


def _schedule(schedule) -> TemperatureSchedule:
    if isinstance(schedule, TemperatureSchedule):
        return schedule
    return TemperatureSchedule(schedule)


def _check_epsilon(epsilon):
    if not (epsilon > 0) or not math.isfinite(epsilon):
        raise ValueError(f"epsilon must be positive and finite, got {epsilon!r}")


def _rates_2d(rates, k: int) -> np.ndarray:
    r = np.asarray(rates, dtype=float)
    if r.ndim == 1:
        r = r[None, :]
    if r.ndim != 2 or r.shape[1] != k:
        raise ValueError(f"rate vector length {r.shape[-1]} does not match schedule length {k}")
    if np.isnan(r).any():
        raise ValueError("rate values must not be NaN")
    if not np.isfinite(r).all():
        raise ValueError("rate values must be finite")
    return r


def batch_log_numerators(rates: np.ndarray, schedule, epsilon: float) -> np.ndarray:
    """Log numerators for a batch of tuples; ``rates`` has shape ``(n, K)``."""
    sched = _schedule(schedule)
    _check_epsilon(epsilon)
    r = _rates_2d(rates, sched.k)
    perms = permutation_table(sched.k)
    acc = np.zeros((r.shape[0], perms.shape[0]))
    for j, a in enumerate(sched.alphas):
        if a != 0.0:
            acc += a * r[:, perms[:, j]]
    return -acc / epsilon


def permutation_log_numerators(rates, schedule, epsilon: float) -> np.ndarray:
    return batch_log_numerators(np.asarray(rates, dtype=float).reshape(1, -1), schedule, epsilon)[0]


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=1, keepdims=True)
    u = np.exp(logits - m)
    return u / u.sum(axis=1, keepdims=True)


def batch_permutation_weights(rates: np.ndarray, schedule, epsilon: float) -> np.ndarray:
    return _softmax_rows(batch_log_numerators(rates, schedule, epsilon))


def permutation_weights(rates, schedule, epsilon: float) -> PermutationWeights:
    w = batch_permutation_weights(np.asarray(rates, dtype=float).reshape(1, -1), schedule, epsilon)[0]
    return PermutationWeights(w, float(epsilon))


def first_slot_unnormalized(logits: np.ndarray) -> np.ndarray:
    """Per-sample weight mass before the final division, shape ``(n, K)``.

    The largest permutation term is scaled to exactly 1, so each row sums
    to a value in ``[1, K!]``.
    """
    logits = np.asarray(logits, dtype=float)
    k = _k_from_factorial(logits.shape[1])
    m = logits.max(axis=1, keepdims=True)
    return np.exp(logits - m) @ _first_slot_indicator(k)


def batch_first_slot_weights(rates: np.ndarray, schedule, epsilon: float) -> np.ndarray:
    u = first_slot_unnormalized(batch_log_numerators(rates, schedule, epsilon))
    return u / u.sum(axis=1, keepdims=True)


def first_slot_weights(rates, schedule, epsilon: float) -> np.ndarray:
    """Total weight of the permutations that put sample ``i`` in the first slot.

    The estimator ``sum_sigma rho(x_sigma) g(x_sigma(1))`` equals
    ``sum_i omega_i g(x_i)`` with these ``omega``.
    """
    return batch_first_slot_weights(np.asarray(rates, dtype=float).reshape(1, -1), schedule, epsilon)[0]


def two_temperature_weight(i_high: float, i_low: float, alpha: float, epsilon: float) -> float:
    """Weight of the swapped pair for K=2, i.e. ``1 / (1 + exp((1 - alpha)/eps * (i_high - i_low)))``.

    ``i_high`` is the rate of the sample placed in the base slot.
    """
    _check_epsilon(epsilon)
    z = (1.0 - alpha) / epsilon * (i_high - i_low)
    # logistic without overflow
    if z >= 0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


def weights_from_log_densities(log_g, epsilon: float | None = None) -> PermutationWeights:
    """Weights built from arbitrary densities instead of a Gibbs rate.

    ``log_g[j, m]`` is the log-density of the slot-``j`` distribution at sample
    ``m``; additive constants per row cancel.
    """
    lg = np.asarray(log_g, dtype=float)
    if lg.ndim != 2 or lg.shape[0] != lg.shape[1]:
        raise ValueError(f"log-density matrix must be square, got shape {lg.shape}")
    if np.isnan(lg).any():
        raise ValueError("log-density matrix contains NaN")
    if not np.isfinite(lg).all():
        raise ValueError("log-density matrix must be finite")
    k = lg.shape[0]
    perms = permutation_table(k)
    logits = lg[np.arange(k), perms].sum(axis=1)
    return PermutationWeights(_softmax_rows(logits[None, :])[0], epsilon)
