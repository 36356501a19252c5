"""Benefit/cost metrics computed from a finished simulation run.

Batch-side benefit is the number of completed jobs and the reciprocal of
the mean turnaround time (completion minus submission); cost is the cluster
size. Web-side benefit is summarized as demand satisfaction: the fraction
of demanded node-seconds actually covered by held nodes over the demand
series' span. Killed jobs count separately and contribute no turnaround.

Because trailing jobs are run to completion after the input window ends,
the all-time completed count equals submitted minus killed; the
``*_in_window`` companions count only completions inside the demand
horizon, which is the quantity a fixed-length experiment reports.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import IO, Optional, Sequence

from .errors import IncomparableRunsError
from .traces import DemandSeries, JobRecord

COMPLETED = "completed"
KILLED = "killed"
QUEUED = "queued"
REJECTED = "rejected"


@dataclass(frozen=True)
class JobOutcome:
    job_id: int
    size: int
    submit: float
    runtime: float
    start: Optional[float] = None
    end: Optional[float] = None
    state: str = QUEUED


@dataclass
class RunData:
    """Raw facts the engine hands to finalize()."""

    config_size: int
    mode: str
    job_outcomes: list[JobOutcome]
    ws_series: list[tuple[float, int]]  # (time, nodes actually held by the web tier)
    utilization_series: list[tuple[float, int, int, int]]  # (time, st_busy, ws_held, other)
    demand: DemandSeries
    sim_end: float
    trace_hash: str
    rejected_count: int = 0
    static_split: Optional[tuple[int, int]] = None


@dataclass
class RunReport:
    config_size: int
    mode: str
    submitted_count: int
    completed_count: int
    killed_count: int
    rejected_count: int
    mean_turnaround: Optional[float]
    turnaround_reciprocal: Optional[float]
    completed_in_window: int
    mean_turnaround_in_window: Optional[float]
    window_horizon: float
    ws_demand_satisfaction: float
    unmet_demand_integral: float
    sim_end: float
    trace_hash: str
    static_split: Optional[tuple[int, int]] = None
    utilization_series: list[tuple[float, int, int, int]] = field(default_factory=list)
    job_outcomes: list[JobOutcome] = field(default_factory=list)

    @property
    def label(self) -> str:
        return f"{self.config_size}-{self.mode}"

    def scalar_row(self) -> dict:
        """The per-run summary row used for CSV output and comparisons."""
        return {
            "config_size": self.config_size,
            "mode": self.mode,
            "submitted": self.submitted_count,
            "completed": self.completed_count,
            "killed": self.killed_count,
            "rejected": self.rejected_count,
            "mean_turnaround_s": _round(self.mean_turnaround),
            "turnaround_reciprocal": _round(self.turnaround_reciprocal, 9),
            "completed_in_window": self.completed_in_window,
            "mean_turnaround_in_window_s": _round(self.mean_turnaround_in_window),
            "ws_demand_satisfaction": _round(self.ws_demand_satisfaction, 6),
            "unmet_demand_node_s": _round(self.unmet_demand_integral),
        }

    def to_json(self) -> str:
        doc = asdict(self)
        doc["job_outcomes"] = [asdict(o) for o in self.job_outcomes]
        return json.dumps(doc, sort_keys=True, indent=2)


def _round(value: Optional[float], digits: int = 3) -> Optional[float]:
    return None if value is None else round(value, digits)


def trace_identity(jobs: Sequence[JobRecord], demand: DemandSeries) -> str:
    """Digest of the simulated inputs; runs over different traces don't compare."""
    h = hashlib.sha256()
    for j in sorted(jobs, key=lambda r: (r.submit_time, r.job_id)):
        h.update(f"{j.job_id},{j.submit_time},{j.runtime},{j.requested_nodes};".encode())
    h.update(b"|")
    for t, d in demand.samples:
        h.update(f"{t},{d};".encode())
    h.update(f"|{demand.duration}".encode())
    return h.hexdigest()[:16]


def _integrate_min_and_deficit(
    demand: DemandSeries, held: Sequence[tuple[float, int]], horizon: float
) -> tuple[float, float, float]:
    """Integrals over [0, horizon] of demand, min(held, demand), max(demand-held, 0)."""
    if horizon <= 0:
        return 0.0, 0.0, 0.0
    # Merge the two step functions' breakpoints.
    points = sorted({0.0, horizon}
                    | {t for t, _ in demand.samples if 0 < t < horizon}
                    | {t for t, _ in held if 0 < t < horizon})
    total = met = deficit = 0.0
    for a, b in zip(points, points[1:]):
        d = demand.value_at(a)
        h = _step_value(held, a)
        span = b - a
        total += d * span
        met += min(d, h) * span
        deficit += max(d - h, 0) * span
    return total, met, deficit


def _step_value(series: Sequence[tuple[float, int]], t: float) -> int:
    value = series[0][1] if series else 0
    for ts, v in series:
        if ts > t:
            break
        value = v
    return value


def finalize(data: RunData) -> RunReport:
    """Fold a run's raw record into the report bundle."""
    outcomes = [o for o in data.job_outcomes if o.state != REJECTED]
    completed = [o for o in outcomes if o.state == COMPLETED]
    killed = [o for o in outcomes if o.state == KILLED]
    queued = [o for o in outcomes if o.state == QUEUED]
    assert len(completed) + len(killed) + len(queued) == len(outcomes)

    mean_ta = reciprocal = None
    if completed:
        mean_ta = sum(o.end - o.submit for o in completed) / len(completed)
        reciprocal = 1.0 / mean_ta if mean_ta > 0 else None

    horizon = data.demand.duration if data.demand.duration > 0 else data.sim_end
    in_window = [o for o in completed if o.end <= horizon]
    mean_ta_win = (
        sum(o.end - o.submit for o in in_window) / len(in_window) if in_window else None
    )

    total_demand, met, deficit = _integrate_min_and_deficit(data.demand, data.ws_series, horizon)
    satisfaction = met / total_demand if total_demand > 0 else 1.0

    return RunReport(
        config_size=data.config_size,
        mode=data.mode,
        submitted_count=len(outcomes),
        completed_count=len(completed),
        killed_count=len(killed),
        rejected_count=data.rejected_count,
        mean_turnaround=mean_ta,
        turnaround_reciprocal=reciprocal,
        completed_in_window=len(in_window),
        mean_turnaround_in_window=mean_ta_win,
        window_horizon=horizon,
        ws_demand_satisfaction=satisfaction,
        unmet_demand_integral=deficit,
        sim_end=data.sim_end,
        trace_hash=data.trace_hash,
        static_split=data.static_split,
        utilization_series=data.utilization_series,
        job_outcomes=sorted(outcomes + [o for o in data.job_outcomes if o.state == REJECTED],
                            key=lambda o: o.job_id),
    )


def compare(reports: Sequence[RunReport]) -> list[dict]:
    """Comparison table: one row per run with deltas against the static baseline.

    The baseline is the unique static-mode report, or the largest
    configuration when no static run is present. cost_ratio is
    config_size / baseline size.
    """
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    hashes = {r.trace_hash for r in reports}
    if len(hashes) != 1:
        raise IncomparableRunsError(f"reports were produced from different traces: {sorted(hashes)}")
    static = [r for r in reports if r.mode == "static"]
    if len(static) > 1:
        raise IncomparableRunsError("more than one static baseline in the comparison")
    baseline = static[0] if static else max(reports, key=lambda r: r.config_size)

    ordered = sorted(reports, key=lambda r: (r is not baseline, -r.config_size))
    rows = []
    for r in ordered:
        row = r.scalar_row()
        row["cost_ratio"] = round(r.config_size / baseline.config_size, 3)
        row["delta_completed"] = r.completed_count - baseline.completed_count
        if r.mean_turnaround is not None and baseline.mean_turnaround is not None:
            row["delta_mean_turnaround_s"] = _round(r.mean_turnaround - baseline.mean_turnaround)
        else:
            row["delta_mean_turnaround_s"] = None
        row["is_baseline"] = r is baseline
        rows.append(row)
    return rows


def write_report_csv(report: RunReport, out: IO[str]) -> None:
    row = report.scalar_row()
    writer = csv.DictWriter(out, fieldnames=list(row.keys()))
    writer.writeheader()
    writer.writerow(row)


def write_comparison_csv(rows: list[dict], out: IO[str]) -> None:
    writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)


def write_utilization_csv(report: RunReport, out: IO[str]) -> None:
    """Long-form plot-ready series: time,st,ws,idle (idle = everything else)."""
    out.write("time,st,ws,idle\n")
    for t, st, ws, other in report.utilization_series:
        ts = int(t) if float(t) == int(t) else repr(float(t))
        out.write(f"{ts},{st},{ws},{other}\n")


def format_comparison(rows: list[dict]) -> str:
    """Fixed-width text rendering of a comparison table."""
    cols = list(rows[0].keys())
    table = [[("" if row[c] is None else str(row[c])) for c in cols] for row in rows]
    widths = [max(len(c), *(len(t[i]) for t in table)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    for t in table:
        lines.append("  ".join(v.ljust(w) for v, w in zip(t, widths)))
    return "\n".join(lines) + "\n"
