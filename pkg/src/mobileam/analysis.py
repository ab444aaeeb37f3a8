"""Bottleneck oracles and replication statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .scenario import ASSEMBLY_DEFAULT, ExperimentConfig, Scenario
from .simkernel import UniformDist

# two-sided 95% Student-t quantiles t(0.975, df), df = 1..40
T975 = (
    12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281,
    2.2010, 2.1788, 2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860,
    2.0796, 2.0739, 2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423,
    2.0395, 2.0369, 2.0345, 2.0322, 2.0301, 2.0281, 2.0262, 2.0244, 2.0227, 2.0211,
)


def t_quantile_975(df: int) -> float:
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if df <= len(T975):
        return T975[df - 1]
    from scipy.stats import t

    return float(t.ppf(0.975, df))


def expected_max_uniform_const(a: float, b: float, c: float) -> float:
    """E[max(X, c)] for X ~ U(a, b)."""
    if a > b:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    if c <= a:
        return (a + b) / 2
    if c >= b:
        return float(c)
    width = b - a
    return c * (c - a) / width + (b + c) / 2 * (b - c) / width


def proposed_cycle(scenario: Scenario, speed: float = 1.0) -> float:
    """Expected bottleneck part-2 cycle, max(PT2, assembly/I-O round trip)."""
    round_trip = 2 * scenario.distance / speed
    return expected_max_uniform_const(scenario.pt2.low, scenario.pt2.high, round_trip)


def oracle_proposed_throughput(scenario: Scenario, config: ExperimentConfig | None = None) -> float:
    """Products per measurement window predicted for the proposed layout."""
    config = config or ExperimentConfig()
    return config.window / proposed_cycle(scenario, config.speed)


def oracle_existing_cycle_mc(
    scenario: Scenario,
    samples: int = 1_000_000,
    seed: int = 0,
    speed: float = 1.0,
    assembly_time: UniformDist = ASSEMBLY_DEFAULT,
) -> float:
    """Monte Carlo E[max(PT2, 3d/speed + AT)] for the courier AMR.

    Only a sanity band: it ignores assembly queueing and buffer effects.
    """
    if samples < 10_000:
        raise ValueError("samples must be >= 10^4")
    rng = np.random.default_rng(seed)
    pt2 = rng.uniform(scenario.pt2.low, scenario.pt2.high, samples)
    at = rng.uniform(assembly_time.low, assembly_time.high, samples)
    courier = 3 * scenario.distance / speed + at
    return float(np.maximum(pt2, courier).mean())


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    std: float
    half_width: float

    @property
    def ci(self) -> tuple[float, float]:
        return self.mean - self.half_width, self.mean + self.half_width


def summarize(values: Sequence[float]) -> SummaryStats:
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("summarize needs at least 2 values")
    # sort first so the float result does not depend on input order
    x = np.sort(x)
    mean = math.fsum(x) / n
    std = math.sqrt(math.fsum((x - mean) ** 2) / (n - 1))
    return SummaryStats(n, mean, std, t_quantile_975(n - 1) * std / math.sqrt(n))


@dataclass(frozen=True)
class ComparisonResult:
    scenario_id: int | None
    mean_existing: float
    mean_proposed: float
    mean_difference: float
    difference_half_width: float

    @property
    def significant(self) -> bool:
        """True when the paired-difference CI excludes zero."""
        return abs(self.mean_difference) > self.difference_half_width


def compare_approaches(
    existing: Sequence[float],
    proposed: Sequence[float],
    scenario_id: int | None = None,
) -> ComparisonResult:
    if len(existing) != len(proposed):
        raise ValueError(
            f"paired comparison needs equal lengths, got {len(existing)} and {len(proposed)}"
        )
    diff = summarize([p - e for e, p in zip(existing, proposed)])
    return ComparisonResult(
        scenario_id=scenario_id,
        mean_existing=summarize(existing).mean,
        mean_proposed=summarize(proposed).mean,
        mean_difference=diff.mean,
        difference_half_width=diff.half_width,
    )
