"""Command-line harness: load traces, derive demand, run sweeps, write reports.

Subcommands:

* ``run``            simulate one or more cluster sizes and compare them
* ``derive-demand``  turn a request-rate CSV into a node-demand CSV
* ``validate``       parse inputs and print counts without simulating

Exit codes: 0 success; 1 the simulation itself reported infeasibility
(rejected jobs or unmet web demand); 2 unusable inputs or an inconsistent
experiment spec. Outputs carry no timestamps, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import argparse
import gzip
import sys
from dataclasses import replace
from datetime import datetime
from pathlib import Path
from typing import Optional, Sequence

from . import engine, metrics
from .autoscaler import AutoscalerConfig, calibrate_capacity, derive_demand
from .engine import DYNAMIC, STATIC, SimConfig
from .errors import ConsolidsimError
from .traces import (
    DemandSeries,
    JobRecord,
    SwfLoadResult,
    load_demand_series,
    load_swf,
    parse_request_series,
    scale_requests,
    window_jobs,
    window_start_for_instant,
    write_demand_series,
)

_BOOL_FLAGS = {"strict-fifo", "event-log"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consolidsim",
        description="Trace-driven simulator for batch/web workload consolidation on a shared cluster.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one or more cluster configurations")
    _add_trace_args(run_p)
    _add_demand_args(run_p)
    run_p.add_argument("--sizes", required=True,
                       help="comma list of cluster sizes; suffix ':static' marks the split baseline "
                            "(e.g. 208:static,200,190)")
    run_p.add_argument("--static-split",
                       help="ST,WS node split for static entries (default: size-peak,peak)")
    run_p.add_argument("--realloc-delay", type=float, default=5.0,
                       help="seconds between a batch reclaim and web availability (default 5)")
    run_p.add_argument("--strict-fifo", action="store_true",
                       help="block the queue at the first non-fitting job instead of skipping")
    run_p.add_argument("--out", required=True, help="output directory for reports")
    run_p.add_argument("--event-log", action="store_true", help="write a per-run event log")
    run_p.add_argument("--config", help="key=value experiment file; flags override file values")

    dd_p = sub.add_parser("derive-demand", help="derive a node-demand CSV from request rates")
    _add_demand_args(dd_p, require_requests=True)
    dd_p.add_argument("--out", required=True, help="demand CSV to write")

    val_p = sub.add_parser("validate", help="parse inputs and print diagnostics")
    _add_trace_args(val_p, required=False)
    _add_demand_args(val_p)
    return parser


def _add_trace_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--hpc-trace", required=required, help="SWF batch-job trace")
    p.add_argument("--procs-per-node", type=int, default=8,
                   help="processors per node for SWF size conversion (default 8)")
    p.add_argument("--window-start", default=None,
                   help="window start: trace-relative seconds, or an ISO-8601 instant "
                        "with timezone resolved against the trace header")
    p.add_argument("--window-len", type=float, default=None, help="window length in seconds")


def _add_demand_args(p: argparse.ArgumentParser, require_requests: bool = False) -> None:
    if not require_requests:
        p.add_argument("--demand-csv", help="precomputed demand CSV (timestamp,demand_nodes)")
    p.add_argument("--requests-csv", required=require_requests,
                   help="request-rate CSV (timestamp,requests_per_second)")
    p.add_argument("--capacity", type=float, default=None,
                   help="requests/second one instance serves at full CPU")
    p.add_argument("--calibrate-peak", type=int, default=None,
                   help="pick the capacity so the derived demand peaks at this many nodes")
    p.add_argument("--scale-factor", type=float, default=1.0, help="request-rate multiplier")
    p.add_argument("--window-secs", type=float, default=20.0, help="utilization window (default 20)")
    p.add_argument("--tick", type=float, default=1.0, help="scaler evaluation period (default 1)")
    p.add_argument("--min-instances", type=int, default=1, help="instance floor (default 1)")


def _load_config_argv(argv: Sequence[str]) -> list[str]:
    """Expand --config FILE into argv entries placed before the real flags."""
    if "--config" not in argv:
        return list(argv)
    idx = list(argv).index("--config")
    if idx + 1 >= len(argv):
        raise ConsolidsimError("--config needs a file path")
    path = Path(argv[idx + 1])
    if not path.is_file():
        raise ConsolidsimError(f"config file not found: {path}")
    injected: list[str] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConsolidsimError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("_", "-")
        if key in _BOOL_FLAGS:
            if value.lower() in ("1", "true", "yes", "on"):
                injected.append(f"--{key}")
            elif value.lower() not in ("0", "false", "no", "off"):
                raise ConsolidsimError(f"{path}:{lineno}: boolean value expected for {key}")
        else:
            injected.extend([f"--{key}", value])
    # command stays first; injected file values come before user flags so flags win
    return [argv[0]] + injected + [a for i, a in enumerate(argv) if i != 0]


def _load_jobs(args) -> tuple[list[JobRecord], SwfLoadResult]:
    path = Path(args.hpc_trace)
    if not path.is_file():
        raise ConsolidsimError(f"HPC trace not found: {path}")
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt") as fh:
        meta = load_swf(fh, args.procs_per_node)
    jobs = list(meta.records)
    if args.window_start is not None or args.window_len is not None:
        start = _window_start(args.window_start, meta)
        if args.window_len is None:
            raise ConsolidsimError("--window-start needs --window-len")
        jobs = window_jobs(jobs, start, args.window_len)
        if not jobs:
            raise ConsolidsimError("window retained no jobs")
    return jobs, meta


def _window_start(token: Optional[str], meta: SwfLoadResult) -> float:
    if token is None:
        return 0.0
    try:
        return float(token)
    except ValueError:
        pass
    try:
        instant = datetime.fromisoformat(token)
    except ValueError:
        raise ConsolidsimError(f"--window-start is neither seconds nor ISO-8601: {token!r}") from None
    return window_start_for_instant(meta, instant)


def _scaler_config(args) -> AutoscalerConfig:
    capacity = args.capacity if args.capacity is not None else 1.0
    return AutoscalerConfig(
        capacity_per_instance=capacity,
        window=args.window_secs,
        tick=args.tick,
        min_instances=args.min_instances,
    )


def _load_demand(args) -> DemandSeries:
    if getattr(args, "demand_csv", None):
        path = Path(args.demand_csv)
        if not path.is_file():
            raise ConsolidsimError(f"demand CSV not found: {path}")
        with path.open() as fh:
            loaded = load_demand_series(fh)
        if loaded.clamped:
            print(f"note: clamped {loaded.clamped} demand values up to 1", file=sys.stderr)
        return loaded.series
    if not args.requests_csv:
        raise ConsolidsimError("need --demand-csv or --requests-csv")
    return _derive_from_requests(args)[0]


def _derive_from_requests(args) -> tuple[DemandSeries, AutoscalerConfig]:
    path = Path(args.requests_csv)
    if not path.is_file():
        raise ConsolidsimError(f"request CSV not found: {path}")
    with path.open() as fh:
        requests = parse_request_series(fh)
    if args.scale_factor != 1.0:
        requests = scale_requests(requests, args.scale_factor)
    cfg = _scaler_config(args)
    if args.calibrate_peak is not None:
        cfg = replace(cfg, capacity_per_instance=calibrate_capacity(requests, args.calibrate_peak, cfg))
    elif args.capacity is None:
        raise ConsolidsimError("need --capacity or --calibrate-peak with --requests-csv")
    return derive_demand(requests, cfg), cfg


def _parse_sizes(args, demand: DemandSeries) -> list[SimConfig]:
    configs = []
    for token in args.sizes.split(","):
        token = token.strip()
        if not token:
            continue
        static = token.endswith(":static")
        if static:
            token = token[: -len(":static")]
        try:
            size = int(token)
        except ValueError:
            raise ConsolidsimError(f"bad --sizes entry {token!r}") from None
        if static:
            split = _static_split(args, size, demand)
            configs.append(SimConfig(size, STATIC, static_split=split,
                                     realloc_delay=args.realloc_delay, strict_fifo=args.strict_fifo))
        else:
            configs.append(SimConfig(size, DYNAMIC, realloc_delay=args.realloc_delay,
                                     strict_fifo=args.strict_fifo))
    if not configs:
        raise ConsolidsimError("--sizes named no configurations")
    return configs


def _static_split(args, size: int, demand: DemandSeries) -> tuple[int, int]:
    if args.static_split:
        try:
            st, ws = (int(p) for p in args.static_split.split(","))
        except ValueError:
            raise ConsolidsimError(f"bad --static-split {args.static_split!r}") from None
    else:
        ws = demand.peak()  # dedicate the web pool for its peak
        st = size - ws
    if st + ws != size or st < 1 or ws < 1:
        raise ConsolidsimError(f"static split {st},{ws} does not form a {size}-node cluster")
    return st, ws


def cmd_run(args) -> int:
    jobs, _meta = _load_jobs(args)
    demand = _load_demand(args)
    configs = _parse_sizes(args, demand)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    reports = []
    for cfg in configs:
        label = f"{cfg.total_nodes}-{cfg.mode}"
        log_fh = (outdir / f"events_{label}.log").open("w") if args.event_log else None
        try:
            report = engine.run(jobs, demand, cfg, event_log=log_fh)
        finally:
            if log_fh:
                log_fh.close()
        reports.append(report)
        with (outdir / f"report_{label}.json").open("w") as fh:
            fh.write(report.to_json() + "\n")
        with (outdir / f"report_{label}.csv").open("w", newline="") as fh:
            metrics.write_report_csv(report, fh)
        with (outdir / f"utilization_{label}.csv").open("w") as fh:
            metrics.write_utilization_csv(report, fh)
        print(f"{label}: completed={report.completed_count} killed={report.killed_count} "
              f"rejected={report.rejected_count} "
              f"mean_turnaround={_fmt_opt(report.mean_turnaround)} "
              f"satisfaction={report.ws_demand_satisfaction:.4f}")

    if len(reports) >= 2:
        rows = metrics.compare(reports)
        with (outdir / "comparison.csv").open("w", newline="") as fh:
            metrics.write_comparison_csv(rows, fh)
        text = metrics.format_comparison(rows)
        (outdir / "comparison.txt").write_text(text)
        print(text, end="")

    # exit 1 flags structural infeasibility only: jobs that can never fit, or
    # demand levels beyond what the configuration can ever serve (transient
    # reallocation gaps always show up in the unmet integral and are normal)
    peak = demand.peak()
    def structurally_unmet(r) -> bool:
        bound = r.static_split[1] if r.mode == STATIC else r.config_size
        return peak > bound

    trouble = any(r.rejected_count > 0 or structurally_unmet(r) for r in reports)
    return 1 if trouble else 0


def _fmt_opt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.1f}"


def cmd_derive_demand(args) -> int:
    series, cfg = _derive_from_requests(args)
    with Path(args.out).open("w") as fh:
        write_demand_series(series, fh)
    print(f"capacity={cfg.capacity_per_instance:g} peak={series.peak()} "
          f"changes={len(series.samples) - 1} duration={series.duration:g}")
    return 0


def cmd_validate(args) -> int:
    if args.hpc_trace:
        jobs, meta = _load_jobs(args)
        span = max(j.submit_time for j in jobs) if jobs else 0
        print(f"jobs: {len(jobs)}")
        print(f"skipped: {meta.skipped}")
        print(f"submit span: {span:g} s")
        print(f"max job size: {max(j.requested_nodes for j in jobs)} nodes")
    if getattr(args, "demand_csv", None) or args.requests_csv:
        demand = _load_demand(args)
        print(f"peak: {demand.peak()}")
        print(f"demand changes: {len(demand.samples) - 1}")
        print(f"demand duration: {demand.duration:g} s")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _load_config_argv(argv) if argv else argv
        args = parser.parse_args(argv)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "derive-demand":
            return cmd_derive_demand(args)
        return cmd_validate(args)
    except ConsolidsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
