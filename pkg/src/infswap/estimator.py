"""Single-trial INS estimators, the simulation driver and summary statistics."""
from __future__ import annotations

import csv
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .weights import (
    TemperatureSchedule,
    batch_log_numerators,
    first_slot_unnormalized,
)

__all__ = [
    "TRIAL_BLOCK",
    "SimulationReport",
    "SimulationResult",
    "HitRecord",
    "ins_trial_indicator",
    "ins_trial_risk",
    "ins_indicator_batch",
    "ins_risk_batch",
    "mc_trial",
    "summarize",
    "run_simulation",
    "emit_hit_records",
    "write_hit_records",
    "read_hit_records",
    "enumerate_expectation",
]

# trials are generated and evaluated in blocks aligned to this size; it is
# part of the sampling definition for chain-based models, not a tuning knob
TRIAL_BLOCK = 1 << 14

# cap on n * K! floats held at once while evaluating weights
_MAX_CELLS = 1 << 21

Z_95 = 1.96


def _schedule(schedule) -> TemperatureSchedule:
    return schedule if isinstance(schedule, TemperatureSchedule) else TemperatureSchedule(schedule)


def _row_slices(n: int, k: int):
    step = max(1, _MAX_CELLS // math.factorial(k))
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def _weighted_mean(rates, values, schedule, epsilon) -> np.ndarray:
    # sum_i u_i g_i / sum_i u_i with u the unnormalised first-slot mass;
    # dividing last keeps g == 1 at exactly 1 and subsets of indicators <= 1
    out = np.empty(rates.shape[0])
    for sl in _row_slices(rates.shape[0], rates.shape[1]):
        u = first_slot_unnormalized(batch_log_numerators(rates[sl], schedule, epsilon))
        out[sl] = (u * values[sl]).sum(axis=1) / u.sum(axis=1)
    return out


def ins_indicator_batch(rates, in_a, schedule, epsilon: float) -> np.ndarray:
    """``theta`` for a batch of trials; ``rates`` and ``in_a`` have shape ``(n, K)``."""
    sched = _schedule(schedule)
    r = np.atleast_2d(np.asarray(rates, dtype=float))
    hits = np.atleast_2d(np.asarray(in_a, dtype=bool))
    if hits.shape != r.shape:
        raise ValueError(f"payload shape {hits.shape} does not match rates shape {r.shape}")
    theta = np.zeros(r.shape[0])
    # trials with no hit are exactly 0 and need no weights
    some = hits.any(axis=1)
    if some.any():
        theta[some] = _weighted_mean(r[some], hits[some].astype(float), sched, epsilon)
    return theta


def ins_risk_batch(rates, f_values, schedule, epsilon: float) -> np.ndarray:
    sched = _schedule(schedule)
    r = np.atleast_2d(np.asarray(rates, dtype=float))
    f = np.atleast_2d(np.asarray(f_values, dtype=float))
    if f.shape != r.shape:
        raise ValueError(f"payload shape {f.shape} does not match rates shape {r.shape}")
    if not np.isfinite(f).all():
        raise ValueError("F values must be finite")
    with np.errstate(under="ignore"):
        g = np.exp(-f / epsilon)
    return _weighted_mean(r, g, sched, epsilon)


def ins_trial_indicator(rates, in_a, schedule, epsilon: float) -> float:
    """One trial of the probability estimator: ``sum_i omega_i 1_A(x_i)``."""
    return float(ins_indicator_batch(np.reshape(rates, (1, -1)), np.reshape(in_a, (1, -1)),
                                     schedule, epsilon)[0])


def ins_trial_risk(rates, f_values, schedule, epsilon: float) -> float:
    """One trial of the risk-sensitive estimator: ``sum_i omega_i exp(-F(x_i)/eps)``."""
    return float(ins_risk_batch(np.reshape(rates, (1, -1)), np.reshape(f_values, (1, -1)),
                                schedule, epsilon)[0])


def mc_trial(in_a: bool) -> float:
    return 1.0 if in_a else 0.0


@dataclass
class SimulationReport:
    n_trials: int
    estimate: float
    std_error: Optional[float]
    rel_error: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    norm_decay_rate: Optional[float]
    mean_theta_sq: float
    epsilon: float
    k: int = 1
    alphas: tuple = (1.0,)
    seed: int = 0
    mode: str = "indicator"
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(n: int, sum_theta: float, sum_theta_sq: float, epsilon: float,
              sum_sq_dev: float | None = None) -> dict:
    """Summary statistics of a stream of trial values.

    ``std_error`` is the sample standard deviation (``1/n`` normalisation)
    over ``sqrt(n)``, ``rel_error`` is ``std_error / estimate`` and the CI is
    ``estimate +- 1.96 std_error`` clipped at zero. The normalised decay rate
    is ``log(mean theta^2) / log(mean theta)``. Quantities that need a log of a
    nonpositive number, or a division by zero, come back as ``None``.

    ``sum_sq_dev`` (the sum of squared deviations from the mean) is used when
    given; otherwise the variance is formed from the two raw sums.
    """
    if n < 1:
        raise ValueError("need at least one trial")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    mean = sum_theta / n
    m2 = sum_theta_sq / n
    if sum_sq_dev is None:
        var = max(m2 - mean * mean, 0.0)
    else:
        var = max(sum_sq_dev / n, 0.0)
    se = math.sqrt(var / n)
    rel = se / mean if mean > 0 else None
    ci_low = max(mean - Z_95 * se, 0.0) if mean >= 0 else mean - Z_95 * se
    ci_high = mean + Z_95 * se
    decay = None
    if 0 < mean and mean != 1.0 and m2 > 0:
        decay = (-epsilon * math.log(m2)) / (-epsilon * math.log(mean))
    return {
        "n_trials": n,
        "estimate": mean,
        "std_error": se,
        "rel_error": rel,
        "ci_low": ci_low,
        "ci_high": ci_high,
        "norm_decay_rate": decay,
        "mean_theta_sq": m2,
        "epsilon": epsilon,
    }


@dataclass
class HitRecord:
    trial: int
    theta: float
    hits: str

    @property
    def neg_log10_theta(self) -> float:
        return -math.log10(self.theta)


def emit_hit_records(thetas, hit_mask, first_trial: int = 0) -> list[HitRecord]:
    """Rows ``(trial, theta, hits)`` for the trials with ``theta > 0``, in trial order."""
    thetas = np.asarray(thetas, dtype=float)
    mask = np.atleast_2d(np.asarray(hit_mask, dtype=bool))
    rows = []
    for i in np.flatnonzero(thetas > 0):
        bits = "".join("1" if h else "0" for h in mask[i])
        rows.append(HitRecord(first_trial + int(i), float(thetas[i]), bits))
    return rows


def write_hit_records(records, target) -> None:
    """CSV with header ``trial,theta,hits``; ``target`` is a path or text file."""
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    fh = open(target, "w", newline="") if own else target
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "theta", "hits"])
        for r in records:
            w.writerow([r.trial, repr(r.theta), r.hits])
    finally:
        if own:
            fh.close()


def read_hit_records(fh) -> list[HitRecord]:
    """Inverse of :func:`write_hit_records` for an open text file."""
    return [HitRecord(int(r["trial"]), float(r["theta"]), r["hits"]) for r in csv.DictReader(fh)]


@dataclass
class SimulationResult:
    report: SimulationReport
    thetas: np.ndarray = field(repr=False)
    hit_records: list | None = None
    sampling_time: float = 0.0


def _evaluate(model, rates, payload, schedule, epsilon, mode):
    if mode == "indicator":
        return ins_indicator_batch(rates, payload, schedule, epsilon)
    if mode == "risk":
        return ins_risk_batch(rates, payload, schedule, epsilon)
    raise ValueError(f"unknown mode {mode!r}")


def run_simulation(model, schedule, epsilon: float, n_trials: int, seed: int,
                   mode: str | None = None, record_hits: bool = False, workers: int = 1,
                   presample: bool = False) -> SimulationResult:
    """Run ``n_trials`` independent INS trials of ``model`` and summarise them.

    Trials are drawn and evaluated in blocks of ``TRIAL_BLOCK`` consecutive
    indices. Each block depends only on ``(seed, block)``, and the trial
    values are summed exactly (``math.fsum``), so the report does not change
    with ``workers``. With ``presample`` every block is drawn before any weight
    is evaluated and ``wall_time`` covers the evaluation only.
    """
    sched = _schedule(schedule)
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if min(sched.alphas) <= 0.0:
        raise ValueError("sampling needs every alpha > 0 (alpha = 0 is an infinite temperature)")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    mode = mode or getattr(model, "mode", "indicator")
    if mode not in ("indicator", "risk"):
        raise ValueError(f"unknown mode {mode!r}")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF

    blocks = [np.arange(s, min(n_trials, s + TRIAL_BLOCK), dtype=np.int64)
              for s in range(0, n_trials, TRIAL_BLOCK)]

    def draw(trials):
        return model.draw_trials(seed, trials, epsilon, sched)

    def evaluate(drawn):
        rates, payload = drawn
        return _evaluate(model, rates, payload, sched, epsilon, mode)

    def both(trials):
        drawn = draw(trials)
        return drawn, evaluate(drawn)

    t0 = time.perf_counter()
    sampling_time = 0.0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        if presample:
            drawn = list(pool.map(draw, blocks))
            sampling_time = time.perf_counter() - t0
            t1 = time.perf_counter()
            thetas_by_block = list(pool.map(evaluate, drawn))
            elapsed = time.perf_counter() - t1
        else:
            out = list(pool.map(both, blocks))
            drawn = [d for d, _ in out]
            thetas_by_block = [t for _, t in out]
            elapsed = time.perf_counter() - t0
    thetas = np.concatenate(thetas_by_block)

    s1 = math.fsum(thetas)
    s2 = math.fsum(thetas * thetas)
    mean = s1 / n_trials
    dev = math.fsum((thetas - mean) ** 2)
    stats = summarize(n_trials, s1, s2, epsilon, sum_sq_dev=dev)
    report = SimulationReport(**stats, k=sched.k, alphas=sched.alphas, seed=seed, mode=mode,
                              wall_time=elapsed)

    records = None
    if record_hits:
        if mode == "indicator":
            hits = np.concatenate([np.asarray(p, dtype=bool) for _, p in drawn])
        else:
            hits = np.zeros((n_trials, sched.k), dtype=bool)
        records = emit_hit_records(thetas, hits)
    return SimulationResult(report, thetas, records, sampling_time)


def enumerate_expectation(atom_rates, atom_payload, schedule, epsilon: float,
                          mode: str = "indicator") -> float:
    """Exact ``E[theta]`` for a finite model by summing over every K-tuple of atoms.

    Slot ``j`` draws atom ``m`` with probability proportional to
    ``exp(-alphas[j] * I_m / epsilon)``.
    """
    sched = _schedule(schedule)
    rates = np.asarray(atom_rates, dtype=float)
    payload = np.asarray(atom_payload)
    a = sched.as_array()
    logp = -np.outer(a, rates) / epsilon
    logp -= logp.max(axis=1, keepdims=True)
    probs = np.exp(logp)
    probs /= probs.sum(axis=1, keepdims=True)
    tuples = np.array(list(itertools.product(range(len(rates)), repeat=sched.k)))
    tuple_prob = np.prod(probs[np.arange(sched.k), tuples], axis=1)
    r = rates[tuples]
    if mode == "indicator":
        theta = ins_indicator_batch(r, payload.astype(bool)[tuples], sched, epsilon)
    else:
        theta = ins_risk_batch(r, payload.astype(float)[tuples], sched, epsilon)
    return math.fsum(tuple_prob * theta)
