"""Counter-based iid labels.

A label is a pure function of ``(seed, vertex key, channel)``: the three are
mixed with the splitmix64 finalizer, so any label can be produced on demand
and in any order.  Integer keys vectorize over numpy ``uint64`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def splitmix64(x) -> np.ndarray:
    """splitmix64 output function on uint64 arrays (wrapping arithmetic)."""
    z = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


def _mix_int(h: int, x: int) -> int:
    return int(splitmix64(np.uint64((h ^ (x & _MASK)) & _MASK)))


def key_of(x) -> int:
    """Stable 64-bit key of a vertex encoding (int or nested tuple of ints)."""
    if isinstance(x, (int, np.integer)):
        return int(x) & _MASK
    h = 0x5BD1E995 ^ len(x)
    for y in x:
        h = _mix_int(h, key_of(y))
    return h


def to_unit(z) -> np.ndarray:
    """Top 53 bits of a uint64 as a float in [0, 1)."""
    return (np.asarray(z, dtype=np.uint64) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class Labeling:
    """iid uniform labels keyed by ``(seed, vertex, channel)``."""

    seed: int
    channel: int = 0

    def _base(self, channel: int) -> np.uint64:
        h = _mix_int(_mix_int(0x243F6A8885A308D3, self.seed), channel)
        return np.uint64(h)

    def raw(self, keys, channel: int | None = None) -> np.ndarray:
        c = self.channel if channel is None else channel
        k = np.asarray(keys).astype(np.uint64)
        with np.errstate(over="ignore"):
            return splitmix64(splitmix64(k ^ self._base(c)) + k)

    def uniform(self, keys, channel: int | None = None) -> np.ndarray:
        """Labels of integer vertex keys (vectorized)."""
        return to_unit(self.raw(keys, channel))

    def label(self, v, channel: int | None = None) -> float:
        return float(self.uniform(np.uint64(key_of(v)), channel))

    def array(self, n: int, channel: int | None = None) -> np.ndarray:
        return self.uniform(np.arange(n, dtype=np.uint64), channel)

    def split(self, v, channel: int) -> float:
        """Derived independent label of ``v`` on another channel."""
        return self.label(v, channel)

    def child(self, channel: int) -> "Labeling":
        """Labeling reading a different channel of the same source."""
        return Labeling(self.seed, channel)

    def rerandomized(self, salt: int) -> "Labeling":
        return Labeling(_mix_int(self.seed, 0xA5A5 + salt) & 0x7FFFFFFFFFFFFFFF, self.channel)


def seed_rng(*parts: int) -> np.random.Generator:
    """numpy generator keyed by integer parts, e.g. ``(seed, vertex, round)``."""
    return np.random.default_rng([int(p) & _MASK for p in parts])
