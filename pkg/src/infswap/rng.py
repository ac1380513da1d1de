"""Counter-based random streams keyed by ``(seed, trial, slot)``.

Every random number used by a simulation is a pure function of the run seed,
the trial index and the temperature slot that consumes it, so results do not
depend on how trials are scheduled across workers.

Construction
------------
A 128-bit Philox key is derived from the triple with the SplitMix64 finalizer
(constants below). Word ``i`` of the stream is word ``i % 4`` of the
Philox4x64-10 block evaluated at counter ``(i // 4 + 1, 0, 0, 0)``, which is
bit-for-bit what ``numpy.random.Philox(key=key)`` emits from a zero counter.

Doubles in ``[0, 1)`` use the top 53 bits; normals push the midpoint of the
same 53-bit cell through an inverse normal CDF (Wichura's AS241), so there
is no rejection and the number of words per normal is exactly one.
"""
from __future__ import annotations

import numba
import numpy as np

__all__ = [
    "SHARED_SLOT",
    "Substream",
    "derive_substream",
    "stream_key",
    "normals",
    "uniforms",
    "raw_words",
]

# slot index reserved for randomness shared by all temperatures of a trial
SHARED_SLOT = 0xFFFFFFFF

_U64 = numba.uint64

# SplitMix64 finalizer and key-separation constants
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SEED_TAG = (np.uint64(0x243F6A8885A308D3), np.uint64(0x13198A2E03707344))
_TRIAL_TAG = (np.uint64(0xA4093822299F31D0), np.uint64(0x082EFA98EC4E6C89))
_SLOT_TAG = (np.uint64(0x452821E638D01377), np.uint64(0xBE5466CF34E90C6C))

# Philox4x64 multipliers and Weyl key increments
_PH_M0 = np.uint64(0xD2E7470EE14C6C93)
_PH_M1 = np.uint64(0xCA5A826395121157)
_PH_W0 = np.uint64(0x9E3779B97F4A7C15)
_PH_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


@numba.njit(cache=True, nogil=True)
def _fmix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True)
def _key(seed, trial, slot):
    seed = _U64(seed)
    trial = _U64(trial)
    slot = _U64(slot)
    k0 = _fmix(seed ^ _SEED_TAG[0])
    k0 = _fmix(k0 ^ trial ^ _TRIAL_TAG[0])
    k0 = _fmix(k0 ^ slot ^ _SLOT_TAG[0])
    k1 = _fmix((seed + _GOLDEN) ^ _SEED_TAG[1])
    k1 = _fmix(k1 ^ (trial * _MIX1) ^ _TRIAL_TAG[1])
    k1 = _fmix(k1 ^ (slot * _MIX2) ^ _SLOT_TAG[1])
    return k0, k1


@numba.njit(cache=True, nogil=True)
def _mulhilo(a, b):
    a_lo = a & _LO32
    a_hi = a >> _S32
    b_lo = b & _LO32
    b_hi = b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _S32) + (lh & _LO32) + (hl & _LO32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return hi, a * b


@numba.njit(cache=True, nogil=True)
def _philox_block(c0, c1, c2, c3, k0, k1):
    for r in range(10):
        if r > 0:
            k0 = k0 + _PH_W0
            k1 = k1 + _PH_W1
        hi0, lo0 = _mulhilo(_PH_M0, c0)
        hi1, lo1 = _mulhilo(_PH_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@numba.njit(cache=True, nogil=True)
def _fill_raw(k0, k1, start, out):
    n = out.shape[0]
    i = 0
    pos = start
    while i < n:
        block = pos // 4
        w = _philox_block(_U64(block + 1), _U64(0), _U64(0), _U64(0), k0, k1)
        j = pos % 4
        while j < 4 and i < n:
            out[i] = w[j]
            i += 1
            j += 1
            pos += 1


@numba.njit(cache=True, nogil=True, error_model="numpy")
def _ppnd16(p):
    # Wichura (1988), Algorithm AS241, double precision branch.
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * (((((((r * 2509.0809287301226727 +
                        33430.575583588128105) * r + 67265.770927008700853) * r +
                      45921.953931549871457) * r + 13731.693765509461125) * r +
                    1971.5909503065514427) * r + 133.14166789178437745) * r +
                  3.387132872796366608) / \
            (((((((r * 5226.495278852545925 +
                   28729.085735721942674) * r + 39307.89580009271061) * r +
                 21213.794301586595867) * r + 5394.1960214247511077) * r +
               687.1870074920579083) * r + 42.313330701600911252) * r + 1.0)
    r = p if q < 0.0 else 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r -= 1.6
        val = (((((((r * 7.7454501427834140764e-4 +
                     0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                   1.27045825245236838258) * r + 3.64784832476320460504) * r +
                 5.7694972214606914055) * r + 4.6303378461565452959) * r +
               1.42343711074968357734) / \
            (((((((r * 1.05075007164441684324e-9 +
                   5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                 0.14810397642748007459) * r + 0.68976733498510000455) * r +
               1.6763848301838038494) * r + 2.05319162663775882187) * r + 1.0)
    else:
        r -= 5.0
        val = (((((((r * 2.01033439929228813265e-7 +
                     2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                   0.026532189526576123093) * r + 0.29656057182850489123) * r +
                 1.7848265399172913358) * r + 5.4637849111641143699) * r +
               6.6579046435011037772) / \
            (((((((r * 2.04426310338993978564e-15 +
                   1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) * r + 0.0148753612908506148525) * r +
               0.13692988092273580531) * r + 0.59983220655588793769) * r + 1.0)
    return -val if q < 0.0 else val


_TWO53 = 1.0 / 9007199254740992.0


@numba.njit(cache=True, nogil=True)
def _word_to_normal(w):
    return _ppnd16(((w >> np.uint64(11)) + 0.5) * _TWO53)


@numba.njit(cache=True, nogil=True)
def _word_to_uniform(w):
    return (w >> np.uint64(11)) * _TWO53


@numba.njit(cache=True, nogil=True)
def _fill_streams(seed, trials, slot, start, kind, out):
    # out has shape (len(trials), count); kind 0 -> uniform, 1 -> normal
    count = out.shape[1]
    buf = np.empty(count, dtype=np.uint64)
    for i in range(trials.shape[0]):
        k0, k1 = _key(seed, trials[i], slot)
        _fill_raw(k0, k1, start, buf)
        if kind == 0:
            for j in range(count):
                out[i, j] = _word_to_uniform(buf[j])
        else:
            for j in range(count):
                out[i, j] = _word_to_normal(buf[j])


@numba.njit(cache=True, nogil=True)
def _keys_for(seed, trials, slot, out):
    for i in range(trials.shape[0]):
        k0, k1 = _key(seed, trials[i], slot)
        out[i, 0] = k0
        out[i, 1] = k1


def _as_u64(x) -> np.uint64:
    return np.uint64(int(x) & 0xFFFFFFFFFFFFFFFF)


def stream_key(seed: int, trial: int, slot: int) -> np.ndarray:
    """128-bit Philox key (two uint64 words) for one substream."""
    out = np.empty((1, 2), dtype=np.uint64)
    _keys_for(_as_u64(seed), np.array([_as_u64(trial)], dtype=np.uint64), _as_u64(slot), out)
    return out[0]


def _trial_array(trials) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(trials, dtype=np.uint64).reshape(-1))


def normals(seed: int, trials, slot: int, count: int, start: int = 0) -> np.ndarray:
    """Standard normals, one row of ``count`` per trial index, for a fixed slot."""
    t = _trial_array(trials)
    out = np.empty((t.shape[0], count), dtype=np.float64)
    _fill_streams(_as_u64(seed), t, _as_u64(slot), start, 1, out)
    return out


def uniforms(seed: int, trials, slot: int, count: int, start: int = 0) -> np.ndarray:
    """Doubles in ``[0, 1)``, one row of ``count`` per trial index."""
    t = _trial_array(trials)
    out = np.empty((t.shape[0], count), dtype=np.float64)
    _fill_streams(_as_u64(seed), t, _as_u64(slot), start, 0, out)
    return out


def raw_words(seed: int, trial: int, slot: int, count: int, start: int = 0) -> np.ndarray:
    k0, k1 = stream_key(seed, trial, slot)
    out = np.empty(count, dtype=np.uint64)
    _fill_raw(k0, k1, start, out)
    return out


class Substream:
    """Sequential view of the stream for one ``(seed, trial, slot)`` triple.

    Each call consumes words from a running position, so successive calls
    continue the stream instead of restarting it.
    """

    def __init__(self, seed: int, trial: int, slot: int):
        self.seed = int(seed)
        self.trial = int(trial)
        self.slot = int(slot)
        self.key = stream_key(seed, trial, slot)
        self.position = 0

    def __repr__(self) -> str:
        return f"Substream(seed={self.seed}, trial={self.trial}, slot={self.slot}, position={self.position})"

    def raw(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint64)
        _fill_raw(self.key[0], self.key[1], self.position, out)
        self.position += n
        return out

    def uniform(self, n: int | None = None):
        out = np.empty((1, 1 if n is None else n))
        _fill_streams(_as_u64(self.seed), np.array([_as_u64(self.trial)]), _as_u64(self.slot),
                      self.position, 0, out)
        self.position += out.shape[1]
        return float(out[0, 0]) if n is None else out[0]

    def normal(self, n: int | None = None):
        out = np.empty((1, 1 if n is None else n))
        _fill_streams(_as_u64(self.seed), np.array([_as_u64(self.trial)]), _as_u64(self.slot),
                      self.position, 1, out)
        self.position += out.shape[1]
        return float(out[0, 0]) if n is None else out[0]

    def bit_generator(self) -> np.random.Philox:
        """numpy ``Philox`` positioned at the start of this stream."""
        return np.random.Philox(key=self.key.copy())


def derive_substream(seed: int, trial_index: int, slot_index: int) -> Substream:
    return Substream(seed, trial_index, slot_index)
