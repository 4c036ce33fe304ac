"""Reproducible random streams and the variate distributions used by agents.

Every piece of randomness in a replication flows from a named stream derived
from (base seed, stream path). Identical (seed, path) gives an identical draw
sequence on any platform, so replications replay bit-for-bit and experiment
arms can share streams (common random numbers).
"""

from __future__ import annotations

import hashlib
import math
import random
import struct
from dataclasses import dataclass


def _derive_seed(parts: tuple[int, ...]) -> int:
    # Hashing the packed path gives well-separated, platform-stable child
    # seeds; one stream is created per customer, so this is on the hot path.
    data = struct.pack(f"<{len(parts)}Q", *(p & 0xFFFFFFFFFFFFFFFF for p in parts))
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


class RngStream:
    """One independent random stream, addressed by (seed, stream path)."""

    __slots__ = ("seed", "path", "_rand")

    def __init__(self, seed: int, *path: int) -> None:
        self.seed = seed
        self.path = path
        self._rand = random.Random(_derive_seed((seed,) + path))

    def substream(self, *extra: int) -> "RngStream":
        return RngStream(self.seed, *(self.path + extra))

    def random(self) -> float:
        return self._rand.random()

    def bernoulli(self, p: float) -> bool:
        """True with probability p. p is validated at config time, not here."""
        if p <= 0.0:
            return False
        if p >= 1.0:
            return True
        return self._rand.random() < p

    def triangular(self, low: float, high: float, mode: float) -> float:
        return self._rand.triangular(low, high, mode)


@dataclass(frozen=True)
class Constant:
    value: float

    def validate(self, name: str) -> list[str]:
        if not (self.value >= 0.0):
            return [f"{name}: constant value must be >= 0, got {self.value}"]
        return []

    def mean(self) -> float:
        return self.value

    def support(self) -> tuple[float, float]:
        return (self.value, self.value)

    def sample(self, stream: RngStream) -> float:
        return self.value


@dataclass(frozen=True)
class Exponential:
    """Memoryless delays; ``rate`` is events per minute (mean = 1/rate)."""

    rate: float

    def validate(self, name: str) -> list[str]:
        if not (self.rate > 0.0) or math.isinf(self.rate):
            return [f"{name}: exponential rate must be a positive finite number, got {self.rate}"]
        return []

    def mean(self) -> float:
        return 1.0 / self.rate

    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    def sample(self, stream: RngStream) -> float:
        # Inverse CDF on one uniform draw keeps streams aligned across arms.
        return -math.log(1.0 - stream.random()) / self.rate


@dataclass(frozen=True)
class Triangular:
    low: float
    mode: float
    high: float

    def validate(self, name: str) -> list[str]:
        if not all(math.isfinite(v) for v in (self.low, self.mode, self.high)):
            return [f"{name}: triangular parameters must be finite, got ({self.low}, {self.mode}, {self.high})"]
        if not (self.low <= self.mode <= self.high):
            return [f"{name}: triangular requires min <= mode <= max, got ({self.low}, {self.mode}, {self.high})"]
        if not (self.low >= 0.0):
            return [f"{name}: triangular min must be >= 0, got {self.low}"]
        return []

    def mean(self) -> float:
        return (self.low + self.mode + self.high) / 3.0

    def support(self) -> tuple[float, float]:
        return (self.low, self.high)

    def sample(self, stream: RngStream) -> float:
        if self.low == self.high:
            return self.low
        return stream.triangular(self.low, self.high, self.mode)


@dataclass(frozen=True)
class Empirical:
    """Discrete table of (value, probability) pairs, e.g. from survey data."""

    table: tuple[tuple[float, float], ...]

    def validate(self, name: str) -> list[str]:
        errors = []
        if not self.table:
            errors.append(f"{name}: empirical table is empty")
            return errors
        total = 0.0
        for value, prob in self.table:
            if prob < 0.0:
                errors.append(f"{name}: empirical probability for value {value} is negative ({prob})")
            total += prob
        if abs(total - 1.0) > 1e-9:
            errors.append(f"{name}: empirical probabilities sum to {total!r}, expected 1 within 1e-9")
        return errors

    def mean(self) -> float:
        return sum(v * p for v, p in self.table)

    def support(self) -> tuple[float, float]:
        values = [v for v, _ in self.table]
        return (min(values), max(values))

    def sample(self, stream: RngStream) -> float:
        u = stream.random()
        acc = 0.0
        for value, prob in self.table:
            acc += prob
            if u < acc:
                return value
        return self.table[-1][0]


Distribution = Constant | Exponential | Triangular | Empirical


def sample(dist: Distribution, stream: RngStream) -> float:
    return dist.sample(stream)


def bernoulli(p: float, stream: RngStream) -> bool:
    return stream.bernoulli(p)
