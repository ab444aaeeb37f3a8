"""Discrete-event throughput model of mobile additive-manufacturing robots."""

from .analysis import (
    ComparisonResult,
    SummaryStats,
    compare_approaches,
    expected_max_uniform_const,
    oracle_existing_cycle_mc,
    oracle_proposed_throughput,
    summarize,
)
from .plant import (
    Layout,
    PlantState,
    ReplicationResult,
    Site,
    build_system,
    count_products,
    run_experiment,
    run_replication,
    travel_time,
)
from .scenario import (
    Approach,
    ConfigError,
    ExperimentConfig,
    Scenario,
    builtin_scenarios,
    full_factorial,
    load_config,
    save_config,
)
from .simkernel import EventCalendar, EventRecord, RngStreams, UniformDist, new_rng_streams, sample_uniform

__version__ = "0.1.0"
