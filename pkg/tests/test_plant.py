import pytest

from mobileam.plant import (
    Layout,
    PartType,
    Site,
    build_system,
    count_products,
    run_replication,
    travel_time,
)
from mobileam.scenario import Approach, ExperimentConfig, Scenario, builtin_scenarios
from mobileam.simkernel import UniformDist

U = UniformDist
EXISTING, PROPOSED = Approach.EXISTING, Approach.PROPOSED


def drive(state, horizon):
    cal = state.calendar
    while cal.peek_time() is not None and cal.peek_time() <= horizon:
        state.handle(cal.pop_next())
        state.check_conservation()
    return state


def const_config(**kw):
    kw.setdefault("assembly_time", U(0, 0))
    kw.setdefault("warmup", 0)
    return ExperimentConfig(**kw)


@pytest.mark.parametrize("d,origin,dest,expected", [
    (15, Site.MACHINING, Site.ASSEMBLY, 15),
    (30, Site.ASSEMBLY, Site.IO, 30),
    (45, Site.IO, Site.IO, 0),
    (30, Site.IO, Site.MACHINING, 30),
])
def test_travel_time(d, origin, dest, expected):
    assert travel_time(Layout(d), origin, dest) == expected


def test_travel_time_scales_with_speed():
    assert travel_time(Layout(30, speed=2), Site.MACHINING, Site.IO) == 15


def test_build_existing():
    state = build_system(builtin_scenarios()[0], EXISTING)
    assert [m.pt for m in state.machines.values()] == [U(20, 40), U(30, 70)]
    assert all(m.stationary for m in state.machines.values())
    assert all(a.site is Site.MACHINING for a in state.amrs.values())
    assert state.layout.distance == 15
    assert vars(state.audit) == dict.fromkeys(vars(state.audit), 0)
    # both prints already running
    assert all(m.print_done_at is not None for m in state.machines.values())


def test_build_proposed():
    state = build_system(builtin_scenarios()[0], PROPOSED)
    assert [m.mounted_on for m in state.machines.values()] == [1, 2]
    assert [a.machine for a in state.amrs.values()] == [1, 2]
    assert all(a.site is Site.ASSEMBLY for a in state.amrs.values())
    assert [m.pt for m in state.machines.values()] == [U(20, 40), U(30, 70)]
    first = [state.calendar.pop_next() for _ in range(2)]
    assert [r.time for r in first] == [0, 0]


def test_existing_machine_deposits_on_fixed_cycle():
    scen = Scenario(1, 15, U(20, 20), U(20, 20))
    state = drive(build_system(scen, EXISTING, const_config(horizon=1440)), 1440)
    part1 = [p for p in state.parts if p.type is PartType.PART1]
    assert [p.completed_at for p in part1[:3]] == [20, 40, 60]
    assert len(part1) == 72


def test_existing_machine_gaps_follow_distribution():
    scen = builtin_scenarios()[0]
    state = drive(build_system(scen, EXISTING, ExperimentConfig()), 1440)
    done = [p.completed_at for p in state.parts if p.type is PartType.PART2]
    gaps = [b - a for a, b in zip([0.0] + done, done)]
    assert gaps and all(30 <= g < 70 for g in gaps)


def test_existing_pure_shuttle_cycle():
    # machine 2 never finishes, so AMR1 never completes a pair
    scen = Scenario(1, 15, U(10**6, 10**6), U(1, 1))
    state = drive(build_system(scen, EXISTING, const_config(horizon=200)), 200)
    drops = [p.dropped_at for p in state.parts if p.dropped_at is not None]
    assert drops == [16, 46, 76, 106, 136, 166, 196]


def test_existing_courier_route():
    scen = Scenario(1, 15, U(1, 1), U(1, 1))
    config = const_config(horizon=400, assembly_time=U(10, 10))
    state = drive(build_system(scen, EXISTING, config), 400)
    legs2 = [(leg.origin, leg.dest, leg.depart, leg.arrive) for leg in state.legs if leg.amr == 2]
    # load at 1, drop at 16, wait AT=10, then assembly -> io -> machining
    assert legs2[:4] == [
        (Site.MACHINING, Site.ASSEMBLY, 1, 16),
        (Site.ASSEMBLY, Site.IO, 26, 41),
        (Site.IO, Site.MACHINING, 41, 56),
        (Site.MACHINING, Site.ASSEMBLY, 56, 71),
    ]
    deliveries = [p.delivered_at for p in state.delivered]
    # courier cycle 3d + AT = 55
    assert deliveries[:3] == [41, 96, 151]
    assert all(leg.dest != Site.IO for leg in state.legs if leg.amr == 1)


def test_proposed_hand_trace_drops():
    scen = Scenario(1, 5, U(20, 20), U(20, 20))
    state = drive(build_system(scen, PROPOSED, const_config(horizon=100)), 100)
    drops = sorted({p.dropped_at for p in state.parts if p.dropped_at is not None})
    assert drops == [20, 40, 60, 80, 100]


def test_proposed_print_dominates_travel():
    scen = builtin_scenarios()[1]  # d=15, U(40,80)
    state = drive(build_system(scen, PROPOSED, ExperimentConfig()), 1440)
    part2 = [p for p in state.parts if p.type is PartType.PART2 and p.dropped_at is not None]
    # AMR is always back before the print finishes, so drops happen on completion
    assert all(p.dropped_at == p.completed_at for p in part2)
    gaps = [b.dropped_at - a.dropped_at for a, b in zip(part2, part2[1:])]
    assert gaps and all(40 <= g < 80 for g in gaps)


@pytest.mark.parametrize("index", [4, 5])
def test_proposed_travel_dominates(index):
    scen = builtin_scenarios()[index]  # d=45
    state = drive(build_system(scen, PROPOSED, ExperimentConfig()), 1440)
    for t in PartType:
        drops = [p.dropped_at for p in state.parts if p.type is t and p.dropped_at is not None]
        assert [b - a for a, b in zip(drops, drops[1:])] == [90.0] * (len(drops) - 1)


def _assembly_state():
    state = build_system(Scenario(1, 5, U(1000, 1000), U(1000, 1000)), PROPOSED,
                         const_config(horizon=2000, assembly_time=U(10, 10)))
    cal = state.calendar
    while cal.peek_time() is not None and cal.peek_time() < 100:
        state.handle(cal.pop_next())
    cal.schedule(100, "marker")
    while cal.pop_next().payload != "marker":
        pass
    return state


def _part(state, ptype):
    from mobileam.plant import Part

    part = Part(len(state.parts) + 1, ptype, state.now)
    state.parts.append(part)
    state.audit.parts_produced += 1
    return part


def test_assembly_needs_a_pair():
    state = _assembly_state()
    state.assembly.inputs[PartType.PART1].append(_part(state, PartType.PART1))
    state.try_assemble()
    assert state.assembly.idle


def test_assembly_consumes_one_of_each():
    state = _assembly_state()
    for t in (PartType.PART1, PartType.PART1, PartType.PART2):
        state.assembly.inputs[t].append(_part(state, t))
    state.try_assemble()
    assert state.assembly.busy_until == 110
    rec = state.calendar.pop_next()
    assert rec.time == 110
    state.handle(rec)
    assert [p.assembled_at for p in state.products] == [110]
    assert len(state.assembly.inputs[PartType.PART1]) == 1
    assert len(state.assembly.inputs[PartType.PART2]) == 0
    state.check_conservation()


def test_assembly_times_within_range():
    state = build_system(builtin_scenarios()[0], PROPOSED, ExperimentConfig())
    draws = []
    sample = state.streams.sample

    def recording(source, dist):
        value = sample(source, dist)
        if source == "at":
            draws.append(value)
        return value

    state.streams.sample = recording
    drive(state, 1440)
    assert len(draws) >= len(state.products) > 10
    assert all(10 <= d < 20 for d in draws)


def test_hand_traced_deliveries():
    scen = Scenario(1, 5, U(20, 20), U(20, 20))
    r = run_replication(scen, PROPOSED, const_config(horizon=100))
    assert r.delivery_times == (25, 45, 65, 85)
    assert r.products == 4


def test_run_replication_is_deterministic():
    s = builtin_scenarios()[2]
    a = run_replication(s, EXISTING, ExperimentConfig(), 3)
    b = run_replication(s, EXISTING, ExperimentConfig(), 3)
    assert a == b


def test_crn_shares_print_samples_across_approaches():
    s = builtin_scenarios()[0]
    cfg = ExperimentConfig()
    ex = build_system(s, EXISTING, cfg, replication=1)
    pr = build_system(s, PROPOSED, cfg, replication=1)
    assert ex.machines[2].print_done_at == pr.machines[2].print_done_at
    off = ExperimentConfig(crn=False)
    ex = build_system(s, EXISTING, off, replication=1)
    pr = build_system(s, PROPOSED, off, replication=1)
    assert ex.machines[2].print_done_at != pr.machines[2].print_done_at


def test_throughput_per_hour():
    r = run_replication(builtin_scenarios()[4], PROPOSED, ExperimentConfig(), 0)
    assert r.throughput_per_hour == pytest.approx(r.products / 21)


def test_handling_time_slows_the_shuttle():
    scen = Scenario(1, 15, U(10**6, 10**6), U(1, 1))
    config = const_config(horizon=200, handling_time=2)
    state = drive(build_system(scen, EXISTING, config), 200)
    drops = [p.dropped_at for p in state.parts if p.dropped_at is not None]
    # load 2 + travel 15 + drop 2 + travel 15 = 34 per cycle
    assert drops[:3] == [1 + 2 + 15 + 2, 20 + 34, 20 + 68]


@pytest.mark.parametrize("times,expected", [
    ([170, 185, 200], 2),
    ([180], 0),
    ([1440], 1),
    ([], 0),
])
def test_count_products_window(times, expected):
    assert count_products(times, 180, 1440) == expected


def test_count_products_empty_window():
    assert count_products([10, 100, 200], 200, 200) == 0


def test_warmup_not_before_horizon_rejected():
    with pytest.raises(ValueError, match="warmup"):
        ExperimentConfig(horizon=100, warmup=100)


def test_amr_legs_form_a_valid_walk():
    state = drive(build_system(builtin_scenarios()[3], EXISTING, ExperimentConfig()), 1440)
    for amr in (1, 2):
        legs = [leg for leg in state.legs if leg.amr == amr]
        for a, b in zip(legs, legs[1:]):
            assert b.origin == a.dest
            assert b.depart >= a.arrive
        for leg in legs:
            assert leg.arrive - leg.depart == pytest.approx(travel_time(state.layout, leg.origin, leg.dest))
