"""Builtin scenarios, factorial generation and JSON experiment configs."""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

from .simkernel import UniformDist


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


class Approach(str, enum.Enum):
    EXISTING = "existing"
    PROPOSED = "proposed"

    def __str__(self) -> str:
        return self.value


PT1_DEFAULT = UniformDist(20, 40)
ASSEMBLY_DEFAULT = UniformDist(10, 20)
PAPER_DISTANCES = (15.0, 30.0, 45.0)
PAPER_PT2 = (UniformDist(30, 70), UniformDist(40, 80))


@dataclass(frozen=True)
class Scenario:
    id: int
    distance: float
    pt2: UniformDist
    pt1: UniformDist = PT1_DEFAULT

    def __post_init__(self) -> None:
        if not self.distance > 0:
            raise ConfigError(f"scenario {self.id}: distance must be > 0, got {self.distance}")
        for name in ("pt1", "pt2"):
            # a zero-length print would never advance the clock
            if not getattr(self, name).low > 0:
                raise ConfigError(f"scenario {self.id}: {name} must be strictly positive")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "distance": self.distance,
            "pt1": self.pt1.as_list(),
            "pt2": self.pt2.as_list(),
        }


@dataclass(frozen=True)
class ExperimentConfig:
    horizon: float = 1440.0
    warmup: float = 180.0
    replications: int = 20
    seed: int = 42
    crn: bool = True
    approaches: tuple[Approach, ...] = (Approach.EXISTING, Approach.PROPOSED)
    speed: float = 1.0
    assembly_time: UniformDist = ASSEMBLY_DEFAULT
    handling_time: float = 0.0

    def __post_init__(self) -> None:
        if self.warmup < 0:
            raise ConfigError(f"warmup must be >= 0, got {self.warmup}")
        if self.warmup >= self.horizon:
            raise ConfigError(f"warmup ({self.warmup:g}) must be < horizon ({self.horizon:g})")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if not self.speed > 0:
            raise ConfigError(f"speed must be > 0, got {self.speed}")
        if self.handling_time < 0:
            raise ConfigError(f"handling_time must be >= 0, got {self.handling_time}")
        if not self.approaches:
            raise ConfigError("approaches must not be empty")
        if self.assembly_time.low < 0:
            raise ConfigError("at: assembly time must be non-negative")

    @property
    def window(self) -> float:
        return self.horizon - self.warmup

    def to_dict(self) -> dict[str, Any]:
        return {
            "horizon": self.horizon,
            "warmup": self.warmup,
            "replications": self.replications,
            "seed": self.seed,
            "crn": self.crn,
            "approaches": [a.value for a in self.approaches],
            "speed": self.speed,
            "at": self.assembly_time.as_list(),
            "handling_time": self.handling_time,
        }


def full_factorial(distances: Sequence[float], pt2_dists: Sequence[UniformDist]) -> list[Scenario]:
    """Cross product, distance outer; ids run 1..n."""
    if not distances:
        raise ConfigError("distances must be non-empty")
    if not pt2_dists:
        raise ConfigError("pt2 distributions must be non-empty")
    return [
        Scenario(i, float(d), dist)
        for i, (d, dist) in enumerate(itertools.product(distances, pt2_dists), start=1)
    ]


def builtin_scenarios() -> list[Scenario]:
    return full_factorial(PAPER_DISTANCES, PAPER_PT2)


def get_scenario(scenario_id: int, scenarios: Iterable[Scenario] | None = None) -> Scenario:
    for s in scenarios if scenarios is not None else builtin_scenarios():
        if s.id == scenario_id:
            return s
    raise ConfigError(f"scenario: unknown id {scenario_id}")


def _dist(value: Any, name: str) -> UniformDist:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value, value]
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{name}: expected [low, high], got {value!r}")
    try:
        return UniformDist(_number(value[0], name), _number(value[1], name))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{name}: {exc}") from None


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    return value


_CONFIG_KEYS = {"horizon", "warmup", "replications", "seed", "crn", "approaches",
                "scenarios", "speed", "at", "handling_time"}
_SCENARIO_KEYS = {"id", "distance", "pt1", "pt2"}


def parse_approaches(value: Any) -> tuple[Approach, ...]:
    if isinstance(value, str):
        value = ["existing", "proposed"] if value == "both" else [value]
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"approaches: expected a list, got {value!r}")
    try:
        chosen = {Approach(v) for v in value}
    except ValueError:
        raise ConfigError(f"approaches: unknown approach in {value!r}") from None
    # keep the canonical existing-then-proposed order
    return tuple(a for a in Approach if a in chosen)


def config_from_dict(data: dict[str, Any]) -> tuple[list[Scenario], ExperimentConfig]:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")

    kwargs: dict[str, Any] = {}
    for key in ("horizon", "warmup", "speed", "handling_time"):
        if key in data:
            kwargs[key] = _number(data[key], key)
    for key in ("replications", "seed"):
        if key in data:
            kwargs[key] = _integer(data[key], key)
    if "crn" in data:
        if not isinstance(data["crn"], bool):
            raise ConfigError(f"crn: expected true/false, got {data['crn']!r}")
        kwargs["crn"] = data["crn"]
    if "approaches" in data:
        kwargs["approaches"] = parse_approaches(data["approaches"])
    if "at" in data:
        kwargs["assembly_time"] = _dist(data["at"], "at")
    config = ExperimentConfig(**kwargs)

    scenarios = {s.id: s for s in builtin_scenarios()}
    entries = data.get("scenarios", [])
    if not isinstance(entries, list):
        raise ConfigError("scenarios: expected a list")
    for i, entry in enumerate(entries):
        where = f"scenarios[{i}]"
        if not isinstance(entry, dict) or "id" not in entry:
            raise ConfigError(f"{where}: each scenario needs an 'id'")
        unknown = set(entry) - _SCENARIO_KEYS
        if unknown:
            raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
        sid = _integer(entry["id"], f"{where}.id")
        base = scenarios.get(sid)
        if base is None and not {"distance", "pt2"} <= set(entry):
            raise ConfigError(f"{where}: new scenario {sid} needs 'distance' and 'pt2'")
        fields: dict[str, Any] = {}
        if "distance" in entry:
            fields["distance"] = _number(entry["distance"], f"{where}.distance")
        for key in ("pt1", "pt2"):
            if key in entry:
                fields[key] = _dist(entry[key], f"{where}.{key}")
        scenarios[sid] = replace(base, **fields) if base else Scenario(id=sid, **fields)
    return [scenarios[k] for k in sorted(scenarios)], config


def load_config(path: str | Path) -> tuple[list[Scenario], ExperimentConfig]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON in {path}: {exc}") from None
    return config_from_dict(data)


def config_to_dict(scenarios: Sequence[Scenario], config: ExperimentConfig) -> dict[str, Any]:
    out = config.to_dict()
    out["scenarios"] = [s.to_dict() for s in scenarios]
    return out


def save_config(path: str | Path, scenarios: Sequence[Scenario], config: ExperimentConfig) -> None:
    text = json.dumps(config_to_dict(scenarios, config), indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")
