"""Level crossing of ``sqrt(eps) W`` on ``[0, 1]``.

Two path constructions are provided:

* Schauder (Levy midpoint) paths ``H_M(z) = z0 t + sum z_{n,k} phi_{n,k}(t)``,
  known exactly at the ``2^M + 1`` dyadic points. The INS model draws
  independent copies of the four lead coefficients ``z0, z11, z21, z23`` per
  temperature and shares every other coefficient across temperatures.
* Linearly interpolated random walks with ``M`` standard-normal increments,
  used for the plain Monte Carlo baseline.

Coefficients are kept in standard-normal units and a flat layout: index 0 is
``z0`` and ``z_{n,k}`` sits at ``2^(n-1) + (k-1)/2``, so a depth-``M`` array
has exactly ``2^M`` entries and the leads are indices 0..3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .. import rng
from ..rng import SHARED_SLOT, _key, _philox_block, _word_to_normal
from .base import Draw, RateModel

N_LEADS = 4
TAIL_SCALINGS = ("base", "per_temperature")

# trials per chunk when materialising tail coefficients
_CHUNK = 1024


def flat_index(n: int, k: int) -> int:
    if n < 1 or k % 2 == 0 or not 1 <= k < 2 ** n:
        raise ValueError(f"no Schauder coefficient ({n}, {k})")
    return 2 ** (n - 1) + (k - 1) // 2


@dataclass
class SchauderCoefficients:
    """``z0`` plus levels ``z[n-1]`` of length ``2^(n-1)`` for ``n = 1..M``."""

    z0: float
    z: list

    def __post_init__(self):
        self.z = [np.asarray(level, dtype=float).reshape(-1) for level in self.z]
        for n, level in enumerate(self.z, start=1):
            if level.shape[0] != 2 ** (n - 1):
                raise ValueError(f"level {n} needs {2 ** (n - 1)} coefficients, got {level.shape[0]}")

    @property
    def m(self) -> int:
        return len(self.z)

    def flat(self) -> np.ndarray:
        return np.concatenate([[float(self.z0)], *self.z])

    @classmethod
    def from_flat(cls, values) -> "SchauderCoefficients":
        values = np.asarray(values, dtype=float).reshape(-1)
        size = values.shape[0]
        m = size.bit_length() - 1
        if size < 1 or size != 2 ** m:
            raise ValueError(f"flat coefficient array must have length 2^M, got {size}")
        return cls(values[0], [values[2 ** (n - 1):2 ** n] for n in range(1, m + 1)])

    @classmethod
    def zeros(cls, m: int) -> "SchauderCoefficients":
        return cls.from_flat(np.zeros(2 ** m))

    def refined(self, level=None) -> "SchauderCoefficients":
        """Copy with one extra level (zeros unless ``level`` is given)."""
        new = np.zeros(2 ** self.m) if level is None else level
        return SchauderCoefficients(self.z0, [*self.z, new])


@dataclass
class DyadicPath:
    """Path values at ``t = i / (len(values) - 1)``."""

    values: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.values))

    def __len__(self):
        return len(self.values)


def schauder_function(n: int, k: int, t: float) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    if k % 2 == 0 or not 1 <= k <= 2 ** n:
        raise ValueError(f"k must be odd in [1, 2^n], got {k}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    h = 2.0 ** ((n - 1) / 2)
    left, mid, right = (k - 1) / 2 ** n, k / 2 ** n, (k + 1) / 2 ** n
    if left <= t < mid:
        return h * (t - left)
    if mid <= t < right:
        return h * (right - t)
    return 0.0


@numba.njit(cache=True, nogil=True)
def _build_path(z, m, lead_scale, tail_scale, out):
    # midpoint displacement: the level-n coefficient lifts the midpoint of a
    # dyadic interval by z * 2^(-(n+1)/2) above the chord
    size = 1 << m
    out[0] = 0.0
    out[size] = lead_scale * z[0]
    for n in range(1, m + 1):
        half = size >> n
        peak = 2.0 ** (-(n + 1) / 2.0)
        base = 1 << (n - 1)
        for q in range(base):
            idx = base + q
            s = lead_scale if idx < N_LEADS else tail_scale
            i = (2 * q + 1) * half
            out[i] = 0.5 * (out[i - half] + out[i + half]) + s * z[idx] * peak


def schauder_path(coeffs: SchauderCoefficients, scale: float) -> DyadicPath:
    """``scale * H_M(z)`` at every ``i / 2^M`` by level-wise refinement."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    if not isinstance(coeffs, SchauderCoefficients):
        coeffs = SchauderCoefficients.from_flat(coeffs)
    z = coeffs.flat()
    out = np.empty(2 ** coeffs.m + 1)
    _build_path(z, coeffs.m, float(scale), float(scale), out)
    return DyadicPath(out)


def schauder_path_direct(coeffs: SchauderCoefficients, scale: float) -> DyadicPath:
    """Same values as :func:`schauder_path` by summing the basis functions."""
    t = np.linspace(0.0, 1.0, 2 ** coeffs.m + 1)
    v = coeffs.z0 * t
    for n, level in enumerate(coeffs.z, start=1):
        for q, c in enumerate(level):
            k = 2 * q + 1
            v = v + c * np.array([schauder_function(n, k, s) for s in t])
    return DyadicPath(scale * v)


def crossing_indicator(path, b: float) -> bool:
    values = path.values if isinstance(path, DyadicPath) else np.asarray(path)
    return bool(values.max() >= b)


def random_walk_path(epsilon: float, m: int, stream) -> DyadicPath:
    """``sqrt(eps / m)`` times the partial sums of ``m`` standard normals."""
    if m < 1:
        raise ValueError("m must be >= 1")
    v = np.empty(m + 1)
    v[0] = 0.0
    v[1:] = math.sqrt(epsilon / m) * np.cumsum(stream.normal(m))
    return DyadicPath(v)


@numba.njit(cache=True, nogil=True)
def _coupled_kernel(leads, tail, m, lead_scales, tail_scales, b, rates, crossed):
    n, k = crossed.shape
    size = 1 << m
    z = np.empty(size)
    path = np.empty(size + 1)
    for i in range(n):
        for c in range(size - N_LEADS):
            z[N_LEADS + c] = tail[i, c]
        for j in range(k):
            r = 0.0
            for c in range(N_LEADS):
                z[c] = leads[i, j, c]
                r += z[c] * z[c]
            # partial rate of the lead coefficients in path units
            rates[i, j] = 0.5 * lead_scales[j] * lead_scales[j] * r
            _build_path(z, m, lead_scales[j], tail_scales[j], path)
            hit = False
            for p in range(size + 1):
                if path[p] >= b:
                    hit = True
                    break
            crossed[i, j] = hit


def _scales(epsilon, alphas, tail_scaling):
    if tail_scaling not in TAIL_SCALINGS:
        raise ValueError(f"tail_scaling must be one of {TAIL_SCALINGS}, got {tail_scaling!r}")
    lead = np.sqrt(epsilon / np.asarray(alphas, dtype=float))
    tail = lead.copy() if tail_scaling == "per_temperature" else np.full_like(lead, math.sqrt(epsilon))
    return lead, tail


def _check_depth(m):
    if int(m) != m or m < 2:
        raise ValueError(f"M must be an integer >= 2, got {m}")
    return int(m)


def coupled_brownian_trial(epsilon: float, schedule, m: int, b: float, stream,
                           tail_scaling: str = "base"):
    """One coupled trial: ``(partial_rates, crossed)``, each of length K.

    The stream supplies ``4K`` lead normals (copy ``j`` first) followed by the
    ``2^M - 4`` shared tail normals. Lead copy ``j`` is scaled by
    ``sqrt(eps / alpha_j)``; the tail by ``sqrt(eps)`` (``"base"``) or by the
    same per-temperature factor (``"per_temperature"``).
    """
    m = _check_depth(m)
    alphas = schedule.alphas if hasattr(schedule, "alphas") else tuple(schedule)
    k = len(alphas)
    leads = stream.normal(N_LEADS * k).reshape(1, k, N_LEADS)
    tail = stream.normal(2 ** m - N_LEADS).reshape(1, -1)
    lead_s, tail_s = _scales(epsilon, alphas, tail_scaling)
    rates = np.empty((1, k))
    crossed = np.empty((1, k), dtype=np.bool_)
    _coupled_kernel(leads, tail, m, lead_s, tail_s, float(b), rates, crossed)
    return rates[0], crossed[0]


class BrownianCrossing(RateModel):
    """Coupled partial-INS model for ``P(max_t sqrt(eps) W(t) >= b)``.

    Slot ``j`` of trial ``t`` supplies the four lead normals of temperature
    ``j``; ``SHARED_SLOT`` supplies the shared tail.
    """

    name = "brownian"
    rate_kind = "partial"

    def __init__(self, m: int = 10, b: float = 0.5, tail_scaling: str = "base"):
        self.m = _check_depth(m)
        if not b >= 0:
            raise ValueError("b must be >= 0")
        self.b = float(b)
        _scales(1.0, (1.0,), tail_scaling)
        self.tail_scaling = tail_scaling
        self.dimension = 2 ** self.m

    def draw(self, epsilon_eff, stream, epsilon=None):
        raise TypeError("coupled paths are drawn jointly; use coupled_brownian_trial or draw_trials")

    def draw_trials(self, seed, trials, epsilon, schedule):
        trials = np.asarray(trials, dtype=np.int64)
        n, k = len(trials), schedule.k
        lead_s, tail_s = _scales(epsilon, schedule.alphas, self.tail_scaling)
        rates = np.empty((n, k))
        crossed = np.empty((n, k), dtype=np.bool_)
        for s in range(0, n, _CHUNK):
            t = trials[s:s + _CHUNK]
            leads = np.stack([rng.normals(seed, t, j, N_LEADS) for j in range(k)], axis=1)
            tail = rng.normals(seed, t, SHARED_SLOT, 2 ** self.m - N_LEADS)
            _coupled_kernel(leads, tail, self.m, lead_s, tail_s, self.b, rates[s:s + _CHUNK],
                            crossed[s:s + _CHUNK])
        return rates, crossed

    def analytic_truth(self, epsilon):
        return None

    def continuum_probability(self, epsilon: float) -> float:
        """Reflection principle for the continuous path: ``2 P(N > b / sqrt(eps))``."""
        from scipy.special import ndtr
        return float(2.0 * ndtr(-self.b / math.sqrt(epsilon)))

    def config(self):
        return {"m_depth": self.m, "b": self.b, "tail_scaling": self.tail_scaling}


@numba.njit(cache=True, nogil=True)
def _walk_max_kernel(seed, trials, slot, steps, scale, b, crossed):
    # fused generate-and-scan so no trial ever materialises its increments
    zero = np.uint64(0)
    for i in range(trials.shape[0]):
        k0, k1 = _key(seed, trials[i], slot)
        s = 0.0
        top = 0.0
        full = steps // 4
        for blk in range(full):
            w0, w1, w2, w3 = _philox_block(np.uint64(blk + 1), zero, zero, zero, k0, k1)
            s += _word_to_normal(w0)
            top = max(top, scale * s)
            s += _word_to_normal(w1)
            top = max(top, scale * s)
            s += _word_to_normal(w2)
            top = max(top, scale * s)
            s += _word_to_normal(w3)
            top = max(top, scale * s)
        rest = steps - 4 * full
        if rest:
            w = _philox_block(np.uint64(full + 1), zero, zero, zero, k0, k1)
            for q in range(rest):
                s += _word_to_normal(w[q])
                top = max(top, scale * s)
        crossed[i] = top >= b


class RandomWalkCrossing(RateModel):
    """Plain Monte Carlo baseline: a walk with ``steps`` increments per trial.

    Only meaningful with a single temperature; the rate is reported as 0.
    Trial ``t`` reads its increments from slot 0, in the same order as
    :func:`random_walk_path` on ``derive_substream(seed, t, 0)``.
    """

    name = "random-walk"

    def __init__(self, steps: int = 2 ** 14, b: float = 0.5):
        if steps < 1:
            raise ValueError("steps must be >= 1")
        self.steps = int(steps)
        self.b = float(b)

    def draw(self, epsilon_eff, stream, epsilon=None):
        path = random_walk_path(epsilon_eff, self.steps, stream)
        return Draw(path, 0.0, crossing_indicator(path, self.b))

    def draw_trials(self, seed, trials, epsilon, schedule):
        if schedule.k != 1:
            raise ValueError("the random-walk baseline is plain Monte Carlo; use K = 1")
        t = np.ascontiguousarray(np.asarray(trials, dtype=np.uint64))
        crossed = np.empty(len(t), dtype=np.bool_)
        scale = math.sqrt(epsilon / schedule.alphas[0] / self.steps)
        _walk_max_kernel(np.uint64(seed), t, np.uint64(0), self.steps, scale, self.b, crossed)
        return np.zeros((len(t), 1)), crossed.reshape(-1, 1)

    def config(self):
        return {"steps": self.steps, "b": self.b}
