"""Command-line front end: ``run``, ``experiment`` and ``oracle``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import (
    compare_approaches,
    oracle_existing_cycle_mc,
    oracle_proposed_throughput,
    proposed_cycle,
    summarize,
)
from .plant import ReplicationResult, run_experiment, run_replication
from .scenario import (
    Approach,
    ConfigError,
    ExperimentConfig,
    Scenario,
    builtin_scenarios,
    get_scenario,
    load_config,
    parse_approaches,
)

log = logging.getLogger("mobileam")

CSV_HEADER = ("scenario", "approach", "replication", "seed", "products", "throughput_per_hour")
SUMMARY_HEADER = (
    "scenario", "approach", "n", "mean_products", "std_products", "ci_half_width",
    "mean_throughput_per_hour",
)


def _f(x: float) -> str:
    return f"{x:.6f}"


def rows_csv(results: Sequence[ReplicationResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in results:
        writer.writerow([
            r.scenario_id, r.approach.value, r.replication, r.seed,
            r.products, _f(r.throughput_per_hour),
        ])
    return buf.getvalue()


def summary_records(results: Sequence[ReplicationResult]) -> list[dict]:
    """One record per (scenario, approach) in first-seen order."""
    groups: dict[tuple[int, Approach], list[ReplicationResult]] = {}
    for r in results:
        groups.setdefault((r.scenario_id, r.approach), []).append(r)
    out = []
    for (sid, approach), rs in groups.items():
        products = [r.products for r in rs]
        hourly = [r.throughput_per_hour for r in rs]
        if len(rs) >= 2:
            stats = summarize(products)
            std, hw = stats.std, stats.half_width
            mean_hourly = summarize(hourly).mean
        else:
            std = hw = 0.0
            mean_hourly = hourly[0]
        out.append({
            "scenario": sid,
            "approach": approach.value,
            "n": len(rs),
            "mean_products": sum(products) / len(products),
            "std_products": std,
            "ci_half_width": hw,
            "mean_throughput_per_hour": mean_hourly,
        })
    return out


def comparison_records(results: Sequence[ReplicationResult]) -> list[dict]:
    by_key: dict[tuple[int, Approach], list[int]] = {}
    for r in results:
        by_key.setdefault((r.scenario_id, r.approach), []).append(r.products)
    out = []
    for sid in sorted({k[0] for k in by_key}):
        ex = by_key.get((sid, Approach.EXISTING))
        pr = by_key.get((sid, Approach.PROPOSED))
        if not ex or not pr or len(ex) < 2 or len(ex) != len(pr):
            continue
        c = compare_approaches(ex, pr, sid)
        out.append({
            "scenario": sid,
            "mean_existing": c.mean_existing,
            "mean_proposed": c.mean_proposed,
            "mean_difference": c.mean_difference,
            "difference_ci_half_width": c.difference_half_width,
        })
    return out


def summary_csv(records: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for rec in records:
        writer.writerow([
            _f(v) if isinstance(v, float) else v for v in (rec[k] for k in SUMMARY_HEADER)
        ])
    return buf.getvalue()


def _round(obj):
    if isinstance(obj, float):
        return float(_f(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round(v) for v in obj]
    return obj


def results_json(results: Sequence[ReplicationResult]) -> str:
    payload = {
        "rows": [
            {
                "scenario": r.scenario_id,
                "approach": r.approach.value,
                "replication": r.replication,
                "seed": r.seed,
                "products": r.products,
                "throughput_per_hour": r.throughput_per_hour,
            }
            for r in results
        ],
        "summary": {
            "groups": summary_records(results),
            "comparisons": comparison_records(results),
        },
    }
    return json.dumps(_round(payload), indent=2) + "\n"


def emit_csv(results: Sequence[ReplicationResult], path: str | Path) -> None:
    Path(path).write_text(rows_csv(results), encoding="utf-8")


def emit_json(results: Sequence[ReplicationResult], path: str | Path) -> None:
    Path(path).write_text(results_json(results), encoding="utf-8")


def format_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [[str(h) for h in headers]]
    cells += [[f"{v:.3f}" if isinstance(v, float) else str(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def print_summary(results: Sequence[ReplicationResult], out=None) -> None:
    out = out or sys.stdout
    recs = summary_records(results)
    print(format_table(
        ["scenario", "approach", "n", "mean", "std", "ci95 +/-", "per hour"],
        [[r["scenario"], r["approach"], r["n"], r["mean_products"], r["std_products"],
          r["ci_half_width"], r["mean_throughput_per_hour"]] for r in recs],
    ), file=out)
    comps = comparison_records(results)
    if comps:
        print(file=out)
        print(format_table(
            ["scenario", "existing", "proposed", "diff", "ci95 +/-"],
            [[c["scenario"], c["mean_existing"], c["mean_proposed"], c["mean_difference"],
              c["difference_ci_half_width"]] for c in comps],
        ), file=out)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _scenario_arg(text: str) -> str | int:
    if text == "all":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a scenario id or 'all', got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--horizon", type=float, help="run length in unit time (default 1440)")
    p.add_argument("--warmup", type=float, help="warm-up excluded from counts (default 180)")


def _sim_options(p: argparse.ArgumentParser) -> None:
    _common(p)
    p.add_argument("--reps", type=_positive_int, help="replications per scenario/approach")
    p.add_argument("--crn", choices=("on", "off"), help="common random numbers across approaches")
    p.add_argument("--out", help="per-replication output file")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default: from --out suffix, else csv)")
    p.add_argument("--trace", help="write an event trace to this file")
    p.add_argument("--jobs", type=_positive_int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mobileam",
        description="Throughput simulation of stationary vs. AMR-mounted AM machines.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run selected scenarios and approaches")
    run.add_argument("--scenario", type=_scenario_arg, default="all")
    run.add_argument("--approach", choices=("existing", "proposed", "both"))
    _sim_options(run)

    exp = sub.add_parser("experiment", help="full 3x2 factorial, both approaches")
    _sim_options(exp)

    orc = sub.add_parser("oracle", help="print analytic bottleneck estimates")
    orc.add_argument("--scenario", type=_scenario_arg, default="all")
    orc.add_argument("--samples", type=int, default=1_000_000)
    _common(orc)
    return parser


def _resolve(args: argparse.Namespace) -> tuple[list[Scenario], ExperimentConfig]:
    if args.config:
        scenarios, config = load_config(args.config)
    else:
        scenarios, config = builtin_scenarios(), ExperimentConfig()
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.warmup is not None:
        overrides["warmup"] = args.warmup
    if getattr(args, "reps", None) is not None:
        overrides["replications"] = args.reps
    if getattr(args, "crn", None) is not None:
        overrides["crn"] = args.crn == "on"
    if getattr(args, "approach", None) is not None:
        overrides["approaches"] = parse_approaches(args.approach)
    if overrides:
        config = replace(config, **overrides)
    scenario = getattr(args, "scenario", "all")
    if scenario != "all":
        scenarios = [get_scenario(scenario, scenarios)]
    return scenarios, config


def _write_trace(path: str, scenarios: Sequence[Scenario], config: ExperimentConfig) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in scenarios:
            for a in config.approaches:
                for rep in range(config.replications):
                    fh.write(f"# scenario={s.id} approach={a.value} replication={rep} seed={config.seed}\n")
                    run_replication(s, a, config, rep, trace=lambda line: fh.write(line + "\n"))


def _simulate(args: argparse.Namespace, scenarios: Sequence[Scenario], config: ExperimentConfig) -> int:
    results = run_experiment(scenarios, config, jobs=args.jobs)
    fmt = args.format
    if fmt is None:
        fmt = "json" if args.out and args.out.endswith(".json") else "csv"
    if args.out:
        out = Path(args.out)
        if fmt == "json":
            out.write_text(results_json(results), encoding="utf-8")
        else:
            out.write_text(rows_csv(results), encoding="utf-8")
            summary_path = out.with_name(out.stem + ".summary.csv")
            summary_path.write_text(summary_csv(summary_records(results)), encoding="utf-8")
        log.info("wrote %d rows to %s", len(results), out)
    if args.trace:
        _write_trace(args.trace, scenarios, config)
    print_summary(results)
    return 0


def run_command(args: argparse.Namespace) -> int:
    return _simulate(args, *_resolve(args))


def experiment_command(args: argparse.Namespace) -> int:
    scenarios, config = _resolve(args)
    if not args.config:
        config = replace(config, approaches=(Approach.EXISTING, Approach.PROPOSED))
    return _simulate(args, scenarios, config)


def oracle_command(args: argparse.Namespace) -> int:
    scenarios, config = _resolve(args)
    rows = []
    for s in scenarios:
        existing = oracle_existing_cycle_mc(
            s, args.samples, seed=config.seed, speed=config.speed,
            assembly_time=config.assembly_time,
        )
        rows.append([
            s.id, s.distance, str(s.pt2),
            proposed_cycle(s, config.speed), oracle_proposed_throughput(s, config),
            existing, config.window / existing,
        ])
    print(format_table(
        ["scenario", "distance", "pt2", "proposed cycle", "proposed count",
         "existing cycle (mc)", "existing count"],
        rows,
    ))
    return 0


COMMANDS = {"run": run_command, "experiment": experiment_command, "oracle": oracle_command}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
