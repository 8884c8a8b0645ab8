"""Deterministic, platform-independent random streams.

All sampling in this package goes through keyed Philox counter streams.  The
Philox raw bit stream is stable across platforms and numpy releases, and the
mapping to floats below is fully spelled out (53-bit mantissa construction),
so a (seed, tag, index) triple always produces the same draws everywhere.
Higher-level distributions are built from these uniforms by explicit inverse
transforms rather than library samplers, for the same reason.
"""

from __future__ import annotations

import hashlib

import numpy as np

_U64 = (1 << 64) - 1


def _derive_key(seed: int, tag: str, index: int) -> int:
    """128-bit Philox key from (seed, tag, index) via SHA-256."""
    payload = (
        b"harvestplan\x00"
        + tag.encode("utf-8")
        + b"\x00"
        + (seed & _U64).to_bytes(8, "little")
        + (index & _U64).to_bytes(8, "little")
    )
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:16], "little")


class KeyedStream:
    """An independent uniform stream identified by (seed, tag, index)."""

    def __init__(self, seed: int, tag: str, index: int = 0):
        self.seed = seed
        self.tag = tag
        self.index = index
        self._bitgen = np.random.Philox(key=_derive_key(seed, tag, index))

    def raw(self, n: int) -> np.ndarray:
        return self._bitgen.random_raw(n)

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1): top 53 bits of each raw 64-bit word."""
        return (self.raw(n) >> np.uint64(11)) * (2.0**-53)

    def uniform(self, low: float, high: float, n: int) -> np.ndarray:
        return low + self.uniforms(n) * (high - low)

    def choice_index(self, weights: np.ndarray, n: int) -> np.ndarray:
        """n categorical draws (0-based) with the given probability weights."""
        w = np.asarray(weights, dtype=float)
        cum = np.cumsum(w / w.sum())
        return np.searchsorted(cum, self.uniforms(n), side="right").clip(0, len(w) - 1)
