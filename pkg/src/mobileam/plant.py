"""Plant model and event logic for the two layouts.

``EXISTING``: both AM machines sit in the machining area; AMR *i* shuttles
parts of machine *i* to assembly. The AMR whose drop completes a part pair
waits for that assembly and carries the product to the I/O station before
returning (route d + d + d).

``PROPOSED``: machine *i* rides on AMR *i* and prints while the AMR travels.
Every cycle the AMR drops its part at assembly, starts the next print, takes
a finished product if one is waiting, and makes the assembly/I-O round trip.
"""

from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .scenario import Approach, ExperimentConfig, Scenario
from .simkernel import EventCalendar, EventRecord, RngStreams, UniformDist, new_rng_streams

log = logging.getLogger(__name__)


class Site(str, enum.Enum):
    MACHINING = "machining"
    ASSEMBLY = "assembly"
    IO = "io"

    def __str__(self) -> str:
        return self.value


class PartType(enum.IntEnum):
    PART1 = 1
    PART2 = 2


class ConservationError(AssertionError):
    pass


@dataclass(frozen=True)
class Layout:
    distance: float
    speed: float = 1.0

    def __post_init__(self) -> None:
        if not (self.distance > 0 and self.speed > 0):
            raise ValueError("distance and speed must be positive")


def travel_time(layout: Layout, origin: Site, dest: Site) -> float:
    # all three sites are pairwise equidistant
    if origin == dest:
        return 0.0
    return layout.distance / layout.speed


@dataclass
class Part:
    id: int
    type: PartType
    completed_at: float
    dropped_at: float | None = None
    product_id: int | None = None


@dataclass
class Product:
    id: int
    part_ids: tuple[int, int]
    assembled_at: float
    delivered_at: float | None = None


@dataclass
class AmMachine:
    id: int
    produces: PartType
    pt: UniformDist
    mounted_on: int | None = None
    print_done_at: float | None = None

    @property
    def stationary(self) -> bool:
        return self.mounted_on is None


@dataclass(frozen=True)
class Leg:
    amr: int
    origin: Site
    dest: Site
    depart: float
    arrive: float


@dataclass
class Amr:
    id: int
    site: Site | None
    machine: int | None = None
    part: Part | None = None
    product: Product | None = None
    leg: Leg | None = None
    waiting: str | None = None  # "part", "product" or "print"

    @property
    def in_transit(self) -> bool:
        return self.site is None


@dataclass
class AssemblyStation:
    at: UniformDist
    inputs: dict[PartType, deque[Part]] = field(
        default_factory=lambda: {t: deque() for t in PartType}
    )
    output: deque[Product] = field(default_factory=deque)
    busy_until: float | None = None
    in_service: tuple[Part, Part] | None = None

    @property
    def idle(self) -> bool:
        return self.busy_until is None

    def pairs_waiting(self) -> int:
        return min(len(q) for q in self.inputs.values())


@dataclass(frozen=True)
class Event:
    kind: str
    entity: int = 0
    site: Site | None = None

    def __str__(self) -> str:
        if self.kind in ("print_done",):
            return f"{self.kind} machine={self.entity}"
        if self.kind == "assembly_done":
            return self.kind
        text = f"{self.kind} amr={self.entity}"
        return f"{text} site={self.site}" if self.site is not None else text


@dataclass
class Audit:
    parts_produced: int = 0
    parts_consumed: int = 0
    products_assembled: int = 0
    products_delivered: int = 0


class PlantState:
    """Full system state for one replication plus its event handlers."""

    def __init__(
        self,
        scenario: Scenario,
        approach: Approach,
        config: ExperimentConfig,
        streams: RngStreams,
    ) -> None:
        self.scenario = scenario
        self.approach = Approach(approach)
        self.config = config
        self.layout = Layout(scenario.distance, config.speed)
        self.streams = streams
        self.calendar = EventCalendar()
        self.handling = config.handling_time
        self.audit = Audit()

        proposed = self.approach is Approach.PROPOSED
        self.machines = {
            1: AmMachine(1, PartType.PART1, scenario.pt1, mounted_on=1 if proposed else None),
            2: AmMachine(2, PartType.PART2, scenario.pt2, mounted_on=2 if proposed else None),
        }
        start = Site.ASSEMBLY if proposed else Site.MACHINING
        self.amrs = {i: Amr(i, start, machine=i if proposed else None) for i in (1, 2)}
        self.assembly = AssemblyStation(config.assembly_time)
        self.machining: dict[int, deque[Part]] = {i: deque() for i in self.machines}
        self.couriers: deque[int] = deque()
        self.parts: list[Part] = []
        self.products: list[Product] = []
        self.delivered: list[Product] = []
        self.legs: list[Leg] = []

    @property
    def now(self) -> float:
        return self.calendar.now

    # -- scheduling helpers -------------------------------------------------

    def _at(self, delay: float, kind: str, entity: int = 0, site: Site | None = None) -> None:
        self.calendar.schedule(self.now + delay, Event(kind, entity, site))

    def _start_print(self, machine: AmMachine) -> None:
        pt = self.streams.sample(f"pt{machine.id}", machine.pt)
        machine.print_done_at = self.now + pt
        self._at(pt, "print_done", machine.id)

    def _depart(self, amr: Amr, dest: Site) -> None:
        if amr.site is None:
            raise RuntimeError(f"AMR {amr.id} cannot depart while in transit")
        tt = travel_time(self.layout, amr.site, dest)
        leg = Leg(amr.id, amr.site, dest, self.now, self.now + tt)
        self.legs.append(leg)
        amr.leg = leg
        amr.site = None
        self._at(tt, "arrive", amr.id, dest)

    def try_assemble(self) -> None:
        station = self.assembly
        if not station.idle or station.pairs_waiting() == 0:
            return
        p1 = station.inputs[PartType.PART1].popleft()
        p2 = station.inputs[PartType.PART2].popleft()
        station.in_service = (p1, p2)
        self.audit.parts_consumed += 2
        at = self.streams.sample("at", station.at)
        station.busy_until = self.now + at
        self._at(at, "assembly_done")

    def _drop_part(self, amr: Amr) -> bool:
        """Put the AMR's part into the assembly buffer.

        Returns True when the drop formed a new part pair.
        """
        part = amr.part
        amr.part = None
        part.dropped_at = self.now
        inputs = self.assembly.inputs
        other = PartType.PART2 if part.type is PartType.PART1 else PartType.PART1
        completes_pair = len(inputs[part.type]) < len(inputs[other])
        inputs[part.type].append(part)
        return completes_pair

    def _new_part(self, machine: AmMachine) -> Part:
        part = Part(len(self.parts) + 1, machine.produces, self.now)
        self.parts.append(part)
        self.audit.parts_produced += 1
        machine.print_done_at = None
        return part

    # -- setup --------------------------------------------------------------

    def start(self) -> None:
        for machine in self.machines.values():
            self._start_print(machine)
        for amr in self.amrs.values():
            if self.approach is Approach.PROPOSED:
                self._at(0.0, "board", amr.id)
            else:
                amr.waiting = "part"

    # -- dispatch -----------------------------------------------------------

    def handle(self, record: EventRecord) -> None:
        ev: Event = record.payload
        if ev.kind == "print_done":
            self._on_print_done(self.machines[ev.entity])
        elif ev.kind == "assembly_done":
            self._on_assembly_done()
        else:
            amr = self.amrs[ev.entity]
            if ev.kind == "arrive":
                self._on_arrive(amr, ev.site)
            elif ev.kind == "depart":
                self._depart(amr, ev.site)
            elif ev.kind == "drop":
                self._on_drop(amr)
            elif ev.kind == "deliver":
                self._on_deliver(amr)
            elif ev.kind == "board":
                self._on_board(amr)
            else:
                raise ValueError(f"unknown event kind {ev.kind!r}")

    def _on_print_done(self, machine: AmMachine) -> None:
        part = self._new_part(machine)
        if machine.stationary:
            self.machining[machine.id].append(part)
            self._start_print(machine)
            amr = self.amrs[machine.id]
            if amr.waiting == "part":
                amr.waiting = None
                self._load_at_machining(amr)
        else:
            amr = self.amrs[machine.mounted_on]
            amr.part = part
            if amr.waiting == "print":
                amr.waiting = None
                self._at(self.handling, "drop", amr.id)

    def _on_assembly_done(self) -> None:
        station = self.assembly
        p1, p2 = station.in_service
        product = Product(len(self.products) + 1, (p1.id, p2.id), self.now)
        p1.product_id = p2.product_id = product.id
        self.products.append(product)
        station.output.append(product)
        station.busy_until = None
        station.in_service = None
        self.audit.products_assembled += 1
        if self.couriers:
            amr = self.amrs[self.couriers.popleft()]
            amr.waiting = None
            amr.product = station.output.popleft()
            self._at(self.handling, "depart", amr.id, Site.IO)
        self.try_assemble()

    def _on_arrive(self, amr: Amr, site: Site) -> None:
        amr.site = site
        amr.leg = None
        if site is Site.IO:
            if amr.product is not None:
                self._at(self.handling, "deliver", amr.id)
            else:
                self._depart(amr, self._home())
        elif self.approach is Approach.EXISTING:
            if site is Site.MACHINING:
                self._load_at_machining(amr)
            else:
                self._at(self.handling, "drop", amr.id)
        else:
            if amr.part is not None:
                self._at(self.handling, "drop", amr.id)
            else:
                amr.waiting = "print"

    def _home(self) -> Site:
        return Site.MACHINING if self.approach is Approach.EXISTING else Site.ASSEMBLY

    def _load_at_machining(self, amr: Amr) -> None:
        buffer = self.machining[amr.id]
        if not buffer:
            amr.waiting = "part"
            return
        amr.part = buffer.popleft()
        self._at(self.handling, "depart", amr.id, Site.ASSEMBLY)

    def _on_drop(self, amr: Amr) -> None:
        completes_pair = self._drop_part(amr)
        if self.approach is Approach.EXISTING:
            if completes_pair:
                # courier: wait for this pair's product, then deliver it
                amr.waiting = "product"
                self.couriers.append(amr.id)
                self.try_assemble()
            else:
                self.try_assemble()
                self._depart(amr, Site.MACHINING)
        else:
            self.try_assemble()
            self._start_print(self.machines[amr.machine])
            # separate event so a zero-length assembly finishes first
            self._at(0.0, "board", amr.id)

    def _on_board(self, amr: Amr) -> None:
        output = self.assembly.output
        if output and amr.product is None:
            amr.product = output.popleft()
            self._at(self.handling, "depart", amr.id, Site.IO)
        else:
            self._depart(amr, Site.IO)

    def _on_deliver(self, amr: Amr) -> None:
        product = amr.product
        amr.product = None
        product.delivered_at = self.now
        self.delivered.append(product)
        self.audit.products_delivered += 1
        self._depart(amr, self._home())

    # -- invariants ---------------------------------------------------------

    def check_conservation(self) -> None:
        a = self.audit
        buffered = sum(len(b) for b in self.machining.values())
        buffered += sum(len(q) for q in self.assembly.inputs.values())
        cargo = sum(amr.part is not None for amr in self.amrs.values())
        in_service = 2 if self.assembly.in_service else 0
        if a.parts_produced != buffered + cargo + in_service + 2 * a.products_assembled:
            raise ConservationError(
                f"part conservation broken at t={self.now}: produced={a.parts_produced} "
                f"buffered={buffered} cargo={cargo} in_service={in_service} "
                f"assembled={a.products_assembled}"
            )
        if a.parts_consumed != in_service + 2 * a.products_assembled:
            raise ConservationError(f"consumed parts mismatch at t={self.now}")
        carried = sum(amr.product is not None for amr in self.amrs.values())
        if a.products_assembled != len(self.assembly.output) + carried + a.products_delivered:
            raise ConservationError(
                f"product conservation broken at t={self.now}: assembled={a.products_assembled} "
                f"output={len(self.assembly.output)} carried={carried} "
                f"delivered={a.products_delivered}"
            )
        for amr in self.amrs.values():
            if amr.machine is None and amr.waiting == "print":
                raise ConservationError(f"AMR {amr.id} waits on a print without a machine")

    def check_products(self) -> None:
        by_id = {p.id: p for p in self.parts}
        seen: set[int] = set()
        for product in self.products:
            types = sorted(by_id[i].type for i in product.part_ids)
            if types != [PartType.PART1, PartType.PART2]:
                raise ConservationError(f"product {product.id} has parts {types}")
            if seen & set(product.part_ids):
                raise ConservationError(f"product {product.id} reuses a part")
            seen.update(product.part_ids)
            if product.delivered_at is not None and product.delivered_at < product.assembled_at:
                raise ConservationError(f"product {product.id} delivered before assembly")

    def audit_summary(self) -> dict[str, int]:
        a = self.audit
        return {
            "parts_produced": a.parts_produced,
            "parts_consumed": a.parts_consumed,
            "products_assembled": a.products_assembled,
            "products_delivered": a.products_delivered,
        }


def streams_for(config: ExperimentConfig, approach: Approach, replication: int) -> RngStreams:
    salt = 0 if config.crn else 1 + list(Approach).index(Approach(approach))
    return new_rng_streams(config.seed, replication, salt)


def build_system(
    scenario: Scenario,
    approach: Approach,
    config: ExperimentConfig | None = None,
    streams: RngStreams | None = None,
    replication: int = 0,
) -> PlantState:
    config = config or ExperimentConfig()
    streams = streams or streams_for(config, approach, replication)
    state = PlantState(scenario, approach, config, streams)
    state.start()
    return state


def count_products(delivery_times: Iterable[float], warmup: float, horizon: float) -> int:
    return sum(1 for t in delivery_times if warmup < t <= horizon)


@dataclass(frozen=True)
class ReplicationResult:
    scenario_id: int
    approach: Approach
    replication: int
    seed: int
    products: int
    throughput_per_hour: float
    assembled: int
    delivery_times: tuple[float, ...]
    audit: dict[str, int]
    events: int


def run_replication(
    scenario: Scenario,
    approach: Approach,
    config: ExperimentConfig,
    replication: int = 0,
    *,
    audit: bool = False,
    trace: Callable[[str], None] | None = None,
) -> ReplicationResult:
    """Simulate one day and count I/O deliveries inside the measurement window."""
    if config.warmup >= config.horizon:
        raise ValueError("warmup must be < horizon")
    state = build_system(scenario, approach, config, replication=replication)
    calendar = state.calendar
    events = 0
    while True:
        nxt = calendar.peek_time()
        if nxt is None or nxt > config.horizon:
            break
        record = calendar.pop_next()
        state.handle(record)
        events += 1
        if trace is not None:
            trace(record.describe())
        if audit:
            state.check_conservation()
    state.check_conservation()
    state.check_products()

    deliveries = tuple(p.delivered_at for p in state.delivered)
    products = count_products(deliveries, config.warmup, config.horizon)
    assembled = count_products((p.assembled_at for p in state.products), config.warmup, config.horizon)
    return ReplicationResult(
        scenario_id=scenario.id,
        approach=Approach(approach),
        replication=replication,
        seed=config.seed,
        products=products,
        throughput_per_hour=products / (config.window / 60.0),
        assembled=assembled,
        delivery_times=deliveries,
        audit=state.audit_summary(),
        events=events,
    )


def _run_task(task: tuple[Scenario, Approach, ExperimentConfig, int]) -> ReplicationResult:
    return run_replication(*task)


def run_experiment(
    scenarios: Sequence[Scenario],
    config: ExperimentConfig,
    jobs: int = 1,
) -> list[ReplicationResult]:
    """All replications ordered by scenario, approach, replication index."""
    tasks = [
        (s, a, config, r)
        for s in sorted(scenarios, key=lambda s: s.id)
        for a in config.approaches
        for r in range(config.replications)
    ]
    if jobs <= 1:
        return [_run_task(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    log.debug("running %d replications on %d workers", len(tasks), jobs)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves task order regardless of completion order
        return list(pool.map(_run_task, tasks, chunksize=8))
