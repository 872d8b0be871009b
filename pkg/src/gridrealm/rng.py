"""Counter-based deterministic randomness.

All engine randomness flows through a stateless mix of (seed, stream tag,
counters) so any draw is a pure function of its inputs: no hidden RNG state,
replays and parallel instances cannot drift. The mixer is splitmix64-style
avalanching, applied per input word. Scalar draws use plain Python ints
(wraparound via masking); grid draws use vectorized uint64 arrays.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_STREAM_SALT: dict[str, int] = {}  # tag -> FNV-1a of the tag string


def _salt(tag: str) -> int:
    salt = _STREAM_SALT.get(tag)
    if salt is None:
        salt = 0xCBF29CE484222325
        for byte in tag.encode():
            salt = ((salt ^ byte) * 0x100000001B3) & _MASK
        _STREAM_SALT[tag] = salt
    return salt


def _mix_int(x: int) -> int:
    x = (x + _GAMMA) & _MASK
    x ^= x >> 30
    x = (x * _M1) & _MASK
    x ^= x >> 27
    x = (x * _M2) & _MASK
    x ^= x >> 31
    return x


def _mix_arr(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(_GAMMA)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_M1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_M2)
    x ^= x >> np.uint64(31)
    return x


def mix64(seed: int, tag: str, *counters: int) -> int:
    """One deterministic 64-bit word from (seed, stream tag, counters)."""
    acc = _mix_int((seed & _MASK) ^ _salt(tag))
    for word in counters:
        acc = _mix_int(acc ^ (word & _MASK))
    return acc


def mix_below(seed: int, tag: str, n: int, *counters: int) -> int:
    """Uniform draw in [0, n) (modulo bias is negligible at 64 bits)."""
    return mix64(seed, tag, *counters) % n


def mix_array(seed: int, tag: str, counters: np.ndarray, extra: int = 0) -> np.ndarray:
    """Vectorized mix64 over an array of counters; returns uint64 array."""
    base = _mix_int((seed & _MASK) ^ _salt(tag))
    if extra:
        base = _mix_int(base ^ (extra & _MASK))
    return _mix_arr(np.uint64(base) ^ counters.astype(np.uint64))


def mix_grid(seed: int, tag: str, rows: np.ndarray, cols: np.ndarray,
             extra: int = 0) -> np.ndarray:
    """Vectorized mix64 over the (rows x cols) index grid; uint64 array."""
    base = _mix_int((seed & _MASK) ^ _salt(tag))
    if extra:
        base = _mix_int(base ^ (extra & _MASK))
    mixed_rows = _mix_arr(np.uint64(base) ^ rows.astype(np.uint64))
    return _mix_arr(mixed_rows[:, None] ^ cols.astype(np.uint64)[None, :])


def unit_grid(words: np.ndarray) -> np.ndarray:
    """Map an array of 64-bit words to floats in [0, 1)."""
    return (words >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def unit_float(word: int) -> float:
    """Map a 64-bit word to [0, 1)."""
    return (word >> 11) * (1.0 / (1 << 53))
