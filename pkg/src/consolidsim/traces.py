"""Workload trace ingestion and normalization.

Three external formats are consumed:

* SWF job logs (the parallel workloads archive text format); only the
  job id, submit time, run time, and allocated-processor fields are used.
* Request-rate CSV: ``timestamp_seconds,requests_per_second``.
* Node-demand CSV: ``timestamp_seconds,demand_nodes``.

All functions here are pure over their inputs and safe to call from
multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import datetime
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

from .errors import EmptyTraceError, TraceParseError

DEFAULT_PROCS_PER_NODE = 8

# 0-based SWF column indices of the consumed fields.
_F_JOB_ID = 0
_F_SUBMIT = 1
_F_RUNTIME = 3
_F_PROCS = 4

TraceInput = Union[str, bytes, IO[str], IO[bytes], Iterable[str]]


@dataclass(frozen=True)
class JobRecord:
    """One batch job from an HPC trace, normalized to node units."""

    job_id: int
    submit_time: float
    runtime: float
    requested_procs: int
    requested_nodes: int

    def rebased(self, shift: float) -> "JobRecord":
        return replace(self, submit_time=self.submit_time - shift)


@dataclass(frozen=True)
class RequestSeries:
    """Web request rate over time; timestamps strictly increasing from 0."""

    samples: tuple[tuple[float, float], ...]
    duration: float

    def __post_init__(self):
        if not self.samples:
            raise ValueError("request series must contain at least one sample")
        if self.samples[0][0] != 0:
            raise ValueError("request series must start at timestamp 0")
        prev = None
        for t, rate in self.samples:
            if prev is not None and t <= prev:
                raise ValueError(f"request timestamps must strictly increase (at t={t})")
            if rate < 0:
                raise ValueError(f"negative request rate at t={t}")
            prev = t

    def rate_at(self, t: float) -> float:
        """Piecewise-constant lookup: the rate of the last sample at or before t."""
        rate = self.samples[0][1]
        for ts, r in self.samples:
            if ts > t:
                break
            rate = r
        return rate


@dataclass(frozen=True)
class DemandSeries:
    """Run-length-encoded node demand of the web tier; never below one node."""

    samples: tuple[tuple[float, int], ...]
    duration: float

    def __post_init__(self):
        if not self.samples:
            raise ValueError("demand series must contain at least one sample")
        prev_t = None
        prev_d = None
        for t, d in self.samples:
            if prev_t is not None and t <= prev_t:
                raise ValueError(f"demand timestamps must strictly increase (at t={t})")
            if d < 1:
                raise ValueError(f"demand below one node at t={t}")
            if d == prev_d:
                raise ValueError(f"consecutive equal demands at t={t} (series must be RLE)")
            prev_t, prev_d = t, d

    def value_at(self, t: float) -> int:
        """Demand in effect at time t; one node before the first sample."""
        if t < self.samples[0][0]:
            return 1
        value = self.samples[0][1]
        for ts, d in self.samples:
            if ts > t:
                break
            value = d
        return value

    def peak(self) -> int:
        return max(d for _, d in self.samples)


@dataclass(frozen=True)
class SwfLoadResult:
    """Parsed SWF trace plus the header/normalization facts callers need."""

    records: tuple[JobRecord, ...]
    skipped: int
    unix_start_time: Optional[int]
    rebase_offset: float


def _iter_lines(stream: TraceInput) -> Iterator[str]:
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8", errors="replace")
    if isinstance(stream, str):
        yield from stream.splitlines()
        return
    for line in stream:
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        yield line.rstrip("\n")


def _num(token: str, what: str, lineno: int) -> float:
    try:
        return int(token)
    except ValueError:
        try:
            return float(token)
        except ValueError:
            raise TraceParseError(f"line {lineno}: non-numeric {what} field {token!r}") from None


def _int(token: str, what: str, lineno: int) -> int:
    value = _num(token, what, lineno)
    if value != int(value):
        raise TraceParseError(f"line {lineno}: {what} must be an integer, got {token!r}")
    return int(value)


def load_swf(stream: TraceInput, procs_per_node: int = DEFAULT_PROCS_PER_NODE) -> SwfLoadResult:
    """Parse an SWF trace, filtering unusable jobs and re-basing submit times.

    Jobs with non-positive run time or processor count are skipped and
    counted. Submit times are shifted so the earliest retained job sits at 0;
    the applied shift and the header's UnixStartTime are returned so callers
    can convert wall-clock instants into trace-relative offsets.
    """
    if procs_per_node < 1:
        raise ValueError("procs_per_node must be >= 1")
    records: list[JobRecord] = []
    seen_ids: set[int] = set()
    skipped = 0
    unix_start: Optional[int] = None
    for lineno, raw in enumerate(_iter_lines(stream), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(";"):
            if unix_start is None and "UnixStartTime:" in line:
                tail = line.split("UnixStartTime:", 1)[1].strip()
                try:
                    unix_start = int(tail.split()[0])
                except (ValueError, IndexError):
                    pass
            continue
        fields = line.split()
        if len(fields) <= _F_PROCS:
            raise TraceParseError(f"line {lineno}: expected at least {_F_PROCS + 1} fields, got {len(fields)}")
        job_id = _int(fields[_F_JOB_ID], "job id", lineno)
        submit = _num(fields[_F_SUBMIT], "submit time", lineno)
        runtime = _num(fields[_F_RUNTIME], "run time", lineno)
        procs = _int(fields[_F_PROCS], "allocated processors", lineno)
        if runtime <= 0 or procs <= 0:
            skipped += 1
            continue
        if job_id in seen_ids:
            raise TraceParseError(f"line {lineno}: duplicate job id {job_id}")
        seen_ids.add(job_id)
        nodes = math.ceil(procs / procs_per_node)
        records.append(JobRecord(job_id, submit, runtime, procs, nodes))
    if not records:
        raise EmptyTraceError("no usable jobs in trace after filtering")
    shift = min(r.submit_time for r in records)
    rebased = tuple(r.rebased(shift) for r in records)
    return SwfLoadResult(rebased, skipped, unix_start, shift)


def parse_swf(stream: TraceInput, procs_per_node: int = DEFAULT_PROCS_PER_NODE) -> list[JobRecord]:
    """Parse an SWF trace into JobRecords; see load_swf for the full result."""
    return list(load_swf(stream, procs_per_node).records)


def format_swf(records: Sequence[JobRecord]) -> str:
    """Serialize records as minimal 18-field SWF lines (unused fields are -1).

    parse_swf(format_swf(records)) recovers the records exactly when their
    earliest submit time is 0 and the same procs_per_node is used.
    """

    def fmt(v: float) -> str:
        return str(int(v)) if float(v) == int(v) else repr(float(v))

    lines = []
    for r in records:
        fields = ["-1"] * 18
        fields[_F_JOB_ID] = str(r.job_id)
        fields[_F_SUBMIT] = fmt(r.submit_time)
        fields[_F_RUNTIME] = fmt(r.runtime)
        fields[_F_PROCS] = str(r.requested_procs)
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def window_jobs(jobs: Sequence[JobRecord], start: float, length: float) -> list[JobRecord]:
    """Keep jobs with start <= submit < start+length, re-based to the window start."""
    if length <= 0:
        raise ValueError("window length must be > 0")
    end = start + length
    return [j.rebased(start) for j in jobs if start <= j.submit_time < end]


def window_start_for_instant(meta: SwfLoadResult, instant: Union[datetime, float]) -> float:
    """Trace-relative offset (post re-base) of a wall-clock instant.

    ``instant`` is a timezone-aware datetime or a unix timestamp. Requires the
    trace header to carry UnixStartTime.
    """
    if meta.unix_start_time is None:
        raise ValueError("trace header has no UnixStartTime; cannot convert wall-clock instants")
    if isinstance(instant, datetime):
        if instant.tzinfo is None:
            raise ValueError("instant must be timezone-aware (e.g. 2000-04-25T15:00:03-07:00)")
        unix = instant.timestamp()
    else:
        unix = float(instant)
    return (unix - meta.unix_start_time) - meta.rebase_offset


def scale_requests(series: RequestSeries, factor: float) -> RequestSeries:
    """Multiply every request rate by a positive factor; timestamps unchanged."""
    if factor <= 0:
        raise ValueError("scale factor must be > 0")
    return RequestSeries(tuple((t, r * factor) for t, r in series.samples), series.duration)


def _split_csv_line(line: str, lineno: int) -> tuple[str, str]:
    parts = [p.strip() for p in line.split(",")]
    if len(parts) < 2:
        raise TraceParseError(f"line {lineno}: expected 'timestamp,value', got {line!r}")
    return parts[0], parts[1]


def _looks_like_header(line: str) -> bool:
    first = line.split(",")[0].strip()
    try:
        float(first)
        return False
    except ValueError:
        return True


def parse_request_series(stream: TraceInput) -> RequestSeries:
    """Read a ``timestamp,requests_per_second`` CSV (header optional).

    Timestamps are re-based so the series starts at 0.
    """
    samples: list[tuple[float, float]] = []
    for lineno, raw in enumerate(_iter_lines(stream), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not samples and _looks_like_header(line):
            continue
        t_tok, r_tok = _split_csv_line(line, lineno)
        t = _num(t_tok, "timestamp", lineno)
        rate = _num(r_tok, "request rate", lineno)
        if samples and t <= samples[-1][0]:
            raise TraceParseError(f"line {lineno}: non-increasing timestamp {t}")
        if rate < 0:
            raise TraceParseError(f"line {lineno}: negative request rate {rate}")
        samples.append((t, rate))
    if not samples:
        raise EmptyTraceError("no request samples found")
    base = samples[0][0]
    shifted = tuple((t - base, r) for t, r in samples)
    return RequestSeries(shifted, duration=shifted[-1][0])


@dataclass(frozen=True)
class DemandLoadResult:
    series: DemandSeries
    clamped: int


def load_demand_series(stream: TraceInput) -> DemandLoadResult:
    """Read a ``timestamp,demand_nodes`` CSV into an RLE DemandSeries.

    Demand values below 1 are clamped to 1 and counted; equal consecutive
    values are merged.
    """
    samples: list[tuple[float, int]] = []
    clamped = 0
    last_t: Optional[float] = None
    saw_data = False
    for lineno, raw in enumerate(_iter_lines(stream), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_data and _looks_like_header(line):
            continue
        saw_data = True
        t_tok, d_tok = _split_csv_line(line, lineno)
        t = _num(t_tok, "timestamp", lineno)
        d = _int(d_tok, "demand", lineno)
        if last_t is not None and t <= last_t:
            raise TraceParseError(f"line {lineno}: non-increasing timestamp {t}")
        last_t = t
        if d < 1:
            d = 1
            clamped += 1
        if samples and samples[-1][1] == d:
            continue
        samples.append((t, d))
    if not samples:
        raise EmptyTraceError("no demand samples found")
    return DemandLoadResult(DemandSeries(tuple(samples), duration=last_t), clamped)


def parse_demand_series(stream: TraceInput) -> DemandSeries:
    """Read a demand CSV; see load_demand_series for the clamp count."""
    return load_demand_series(stream).series


def write_demand_series(series: DemandSeries, out: IO[str]) -> None:
    """Write a DemandSeries as a demand CSV readable by parse_demand_series."""
    out.write("timestamp_seconds,demand_nodes\n")
    for t, d in series.samples:
        ts = int(t) if float(t) == int(t) else repr(float(t))
        out.write(f"{ts},{d}\n")
