"""Event calendar, simulation clock and seeded random streams.

Time is a plain float in "unit time" (minutes by default). The calendar
orders events by ``(time, seq)`` so ties pop in insertion order, which keeps
every run reproducible for a given seed.
"""

from __future__ import annotations

import heapq
import math
import zlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SOURCES = ("pt1", "pt2", "at")


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock."""


@dataclass(frozen=True, order=True)
class EventRecord:
    time: float
    seq: int
    payload: Any = field(compare=False)

    def describe(self) -> str:
        return f"t={self.time:g} seq={self.seq} {self.payload}"


class EventCalendar:
    """Future event list with a monotone clock.

    Ties on time are broken by insertion sequence (FIFO).
    """

    def __init__(self) -> None:
        self._heap: list[EventRecord] = []
        self._seq = 0
        self.now = 0.0

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)

    def schedule(self, time: float, payload: Any) -> EventRecord:
        if time < self.now:
            raise SchedulingError(f"cannot schedule {payload!r} at t={time} before now={self.now}")
        record = EventRecord(float(time), self._seq, payload)
        self._seq += 1
        heapq.heappush(self._heap, record)
        return record

    def peek_time(self) -> float | None:
        return self._heap[0].time if self._heap else None

    def pop_next(self) -> EventRecord | None:
        if not self._heap:
            return None
        record = heapq.heappop(self._heap)
        self.now = record.time
        return record


@dataclass(frozen=True)
class UniformDist:
    """Continuous uniform on ``[low, high)``; ``low == high`` is a constant."""

    low: float
    high: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.low) and math.isfinite(self.high)):
            raise ValueError(f"uniform bounds must be finite, got ({self.low}, {self.high})")
        if self.low > self.high:
            raise ValueError(f"uniform low ({self.low}) exceeds high ({self.high})")

    @classmethod
    def const(cls, value: float) -> UniformDist:
        return cls(value, value)

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)

    @property
    def is_degenerate(self) -> bool:
        return self.low == self.high

    def as_list(self) -> list[float]:
        return [self.low, self.high]

    def __str__(self) -> str:
        return f"U({self.low:g},{self.high:g})"


def sample_uniform(stream: np.random.Generator, dist: UniformDist) -> float:
    if dist.is_degenerate:
        return dist.low
    value = dist.low + (dist.high - dist.low) * float(stream.random())
    # rounding can land exactly on the upper bound
    if value >= dist.high:
        value = math.nextafter(dist.high, dist.low)
    return value


class RngStreams:
    """Independent generators per stochastic source.

    Each substream is keyed by ``(master seed, replication, source name, salt)``.
    With ``salt=0`` for every approach, both layouts see the same samples
    (common random numbers).
    """

    def __init__(self, seed: int, replication: int, salt: int = 0) -> None:
        self.seed = int(seed)
        self.replication = int(replication)
        self.salt = int(salt)
        self._streams: dict[str, np.random.Generator] = {}

    def stream(self, source: str) -> np.random.Generator:
        gen = self._streams.get(source)
        if gen is None:
            key = (self.replication, zlib.crc32(source.encode()), self.salt)
            seq = np.random.SeedSequence(entropy=self.seed & (2**64 - 1), spawn_key=key)
            gen = np.random.Generator(np.random.PCG64(seq))
            self._streams[source] = gen
        return gen

    def __getitem__(self, source: str) -> np.random.Generator:
        return self.stream(source)

    def sample(self, source: str, dist: UniformDist) -> float:
        return sample_uniform(self.stream(source), dist)


def new_rng_streams(seed: int, replication: int, salt: int = 0) -> RngStreams:
    streams = RngStreams(seed, replication, salt)
    for name in SOURCES:
        streams.stream(name)
    return streams

