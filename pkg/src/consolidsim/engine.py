"""Deterministic virtual-time event loop driving the shared cluster.

One run merges a batch-job stream and a web-tier demand series. In dynamic
mode the cooperative policies move nodes between tiers (web claims force
batch reclaims, paying a reallocation delay; batch-to-web kills follow the
kill order). In static mode the two tiers own fixed pools and never trade.

Simultaneous events process in a fixed kind order (finish, demand change,
reallocation arrival, submit) and FIFO within a kind, so identical inputs
always produce identical reports and event logs. Time is purely virtual:
there is no pacing, so a two-week trace runs as fast as its event count
allows and the results depend only on the event timeline.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import IntEnum
from typing import IO, Optional, Sequence

from . import metrics
from .cluster import ST, WS, ClusterState, TransitBatch
from .errors import ConservationError
from .metrics import COMPLETED, KILLED, QUEUED, REJECTED, JobOutcome, RunData, RunReport
from .policies import (
    DecisionKind,
    ReclaimOrder,
    RunningJobView,
    provision_on_idle,
    provision_on_ws_claim,
    st_release_plan,
    ws_adjust,
)
from .scheduler import JobQueue, schedule_pass
from .traces import DemandSeries, JobRecord

DYNAMIC = "dynamic"
STATIC = "static"


class EventKind(IntEnum):
    """Processing priority for simultaneous events (lower runs first)."""

    JOB_FINISH = 0
    DEMAND_CHANGE = 1
    REALLOCATION_READY = 2
    JOB_SUBMIT = 3


_KIND_NAMES = {
    EventKind.JOB_FINISH: "JobFinish",
    EventKind.DEMAND_CHANGE: "DemandChange",
    EventKind.REALLOCATION_READY: "ReallocationReady",
    EventKind.JOB_SUBMIT: "JobSubmit",
}


@dataclass(frozen=True)
class SimConfig:
    total_nodes: int
    mode: str = DYNAMIC
    static_split: Optional[tuple[int, int]] = None
    realloc_delay: float = 5.0
    strict_fifo: bool = False
    check_invariants: bool = True

    def __post_init__(self):
        if self.total_nodes < 1:
            raise ValueError("total_nodes must be >= 1")
        if self.mode not in (DYNAMIC, STATIC):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.realloc_delay < 0:
            raise ValueError("realloc_delay must be >= 0")
        if self.mode == STATIC:
            if self.static_split is None:
                raise ValueError("static mode needs a (st_nodes, ws_nodes) split")
            st, ws = self.static_split
            if st < 1 or ws < 1 or st + ws != self.total_nodes:
                raise ValueError(f"static split {self.static_split} must be positive and sum to {self.total_nodes}")
        elif self.static_split is not None:
            raise ValueError("static_split only applies to static mode")


def _fmt_time(t: float) -> str:
    return str(int(t)) if float(t) == int(t) else repr(float(t))


class _Sim:
    def __init__(self, jobs: Sequence[JobRecord], demand: DemandSeries, cfg: SimConfig,
                 event_log: Optional[IO[str]] = None):
        self.cfg = cfg
        self.demand = demand
        self.log = event_log
        self.now = 0.0
        self._seq = 0
        self._heap: list[tuple[float, int, int, object]] = []

        ordered = sorted(jobs, key=lambda j: (j.submit_time, j.job_id))
        bound = cfg.static_split[0] if cfg.mode == STATIC else cfg.total_nodes - 1
        self.jobs: list[JobRecord] = []
        self.rejected: list[JobRecord] = []
        for j in ordered:
            (self.jobs if j.requested_nodes <= bound else self.rejected).append(j)

        self.queue = JobQueue()
        self.running: dict[int, JobRecord] = {}
        self._start: dict[int, float] = {}
        self._end: dict[int, float] = {}
        self._state: dict[int, str] = {}
        self.cur_demand = demand.value_at(0.0)

        if cfg.mode == DYNAMIC:
            self.cluster = ClusterState(cfg.total_nodes)
            ws0 = min(self.cur_demand, cfg.total_nodes)
            self.cluster.allocate(WS, ws0)
            self.cluster.allocate(ST, len(self.cluster.idle))
        else:
            st_nodes, self.ws_pool = cfg.static_split
            self.cluster = ClusterState(st_nodes)
            self.cluster.allocate(ST, st_nodes)

        self.ws_series: list[tuple[float, int]] = []
        self.util_series: list[tuple[float, int, int, int]] = []
        self._record_state()

        for job in self.jobs:
            self._push(job.submit_time, EventKind.JOB_SUBMIT, job)
        for t, value in demand.samples:
            if t > 0:
                self._push(t, EventKind.DEMAND_CHANGE, value)
        if cfg.mode == DYNAMIC and demand.duration > 0:
            # When the demand series ends the web tier settles at its one-node
            # floor, letting trailing batch work drain on the full pool.
            self._push(demand.duration, EventKind.DEMAND_CHANGE, 1)

    # -- plumbing --------------------------------------------------------

    def _push(self, time: float, kind: EventKind, payload) -> None:
        heapq.heappush(self._heap, (time, int(kind), self._seq, payload))
        self._seq += 1

    def _ws_held_now(self) -> int:
        if self.cfg.mode == STATIC:
            return min(self.cur_demand, self.ws_pool)
        return len(self.cluster.ws_held)

    def _record_state(self) -> None:
        held = self._ws_held_now()
        st_busy = self.cluster.st_busy_count()
        other = self.cfg.total_nodes - st_busy - held
        _note(self.ws_series, self.now, (held,))
        _note(self.util_series, self.now, (st_busy, held, other))

    def _log_event(self, kind: EventKind, payload) -> None:
        if self.log is None:
            return
        if kind in (EventKind.JOB_SUBMIT, EventKind.JOB_FINISH):
            detail = f"job={payload.job_id}"
        elif kind is EventKind.DEMAND_CHANGE:
            detail = f"demand={payload}"
        else:
            detail = "nodes=" + ",".join(str(n) for n in sorted(payload.nodes))
        self.log.write(f"{_fmt_time(self.now)}\t{_KIND_NAMES[kind]}\t{detail}\n")

    # -- event handlers --------------------------------------------------

    def _schedule_jobs(self) -> None:
        ids = schedule_pass(self.queue, len(self.cluster.st_free), self.cfg.strict_fifo)
        if not ids:
            return
        for job in self.queue.dequeue_selected(ids):
            self.cluster.bind_job(job.job_id, job.requested_nodes)
            self.running[job.job_id] = job
            self._start[job.job_id] = self.now
            self._push(self.now + job.runtime, EventKind.JOB_FINISH, job)

    def _grant_idle(self) -> None:
        decision = provision_on_idle(len(self.cluster.idle))
        if decision.node_count:
            self.cluster.allocate(ST, decision.node_count)
            self._schedule_jobs()

    def _kill(self, job_id: int) -> None:
        self.cluster.release_job(job_id)
        del self.running[job_id]
        self._end[job_id] = self.now
        self._state[job_id] = KILLED

    def apply_reclaim(self, order: ReclaimOrder) -> TransitBatch:
        """Force the batch tier to free nodes and start their web handoff.

        Victims die immediately (their nodes return to the batch free set);
        the demanded count then travels for realloc_delay seconds before the
        web tier holds it. Kill surplus stays with the batch tier.
        """
        views = [RunningJobView(j.job_id, j.requested_nodes, self.now - self._start[j.job_id])
                 for j in self.running.values()]
        plan = st_release_plan(order.demanded, len(self.cluster.st_free), views)
        killed_any = False
        for decision in plan:
            if decision.kind is DecisionKind.KILL_JOBS:
                for victim in decision.victim_jobs:
                    self._kill(victim)
                killed_any = True
        batch = self.cluster.begin_transit(order.demanded, self.now + order.deadline_hint)
        self._push(batch.ready_time, EventKind.REALLOCATION_READY, batch)
        if killed_any:
            self._schedule_jobs()  # kill surplus may fit a queued job
        return batch

    def _release_ws_surplus(self) -> None:
        target = min(self.cur_demand, self.cfg.total_nodes)
        over = len(self.cluster.ws_held) - target
        if over > 0:
            self.cluster.ws_release(over)
            self._grant_idle()

    def _on_demand_change(self, value: int) -> None:
        self.cur_demand = value
        if self.cfg.mode == STATIC:
            return
        target = min(value, self.cfg.total_nodes)
        committed = len(self.cluster.ws_held) + self.cluster.transit_count()
        if len(self.cluster.ws_held) > target:
            self._release_ws_surplus()
            return
        adjustment = ws_adjust(committed, target) if committed != target else None
        if adjustment is None or adjustment.kind is not DecisionKind.GRANT_TO_WS:
            return
        for decision in provision_on_ws_claim(adjustment.node_count, len(self.cluster.idle)):
            if decision.kind is DecisionKind.GRANT_TO_WS:
                self.cluster.allocate(WS, decision.node_count)
            else:
                self.apply_reclaim(ReclaimOrder(decision.node_count, self.cfg.realloc_delay))

    def _on_finish(self, job: JobRecord) -> None:
        self.cluster.release_job(job.job_id)
        del self.running[job.job_id]
        self._end[job.job_id] = self.now
        self._state[job.job_id] = COMPLETED
        self._schedule_jobs()

    def _on_realloc_ready(self, batch: TransitBatch) -> None:
        self.cluster.finish_transit(batch)
        self._release_ws_surplus()

    # -- main loop -------------------------------------------------------

    def execute(self) -> RunData:
        while self._heap:
            time, kind_value, _seq, payload = heapq.heappop(self._heap)
            kind = EventKind(kind_value)
            if kind is EventKind.JOB_FINISH and payload.job_id not in self.running:
                continue  # job was killed before its natural finish
            self.now = time
            self._log_event(kind, payload)
            if kind is EventKind.JOB_FINISH:
                self._on_finish(payload)
            elif kind is EventKind.DEMAND_CHANGE:
                self._on_demand_change(payload)
            elif kind is EventKind.REALLOCATION_READY:
                self._on_realloc_ready(payload)
            else:
                self.queue.enqueue(payload)
                self._schedule_jobs()
            self._record_state()
            if self.cfg.check_invariants:
                self.cluster.assert_conserved()
                self._check_counts()
        return self._collect()

    def _check_counts(self) -> None:
        if self.cfg.mode == DYNAMIC:
            held = len(self.cluster.ws_held) + self.cluster.transit_count()
            if held > self.cfg.total_nodes:
                raise ConservationError("web tier holds more than the cluster")

    def _collect(self) -> RunData:
        outcomes = []
        for job in self.jobs:
            state = self._state.get(job.job_id, QUEUED)
            outcomes.append(JobOutcome(
                job_id=job.job_id,
                size=job.requested_nodes,
                submit=job.submit_time,
                runtime=job.runtime,
                start=self._start.get(job.job_id),
                end=self._end.get(job.job_id),
                state=state,
            ))
        for job in self.rejected:
            outcomes.append(JobOutcome(job.job_id, job.requested_nodes, job.submit_time,
                                       job.runtime, state=REJECTED))
        split = self.cfg.static_split if self.cfg.mode == STATIC else None
        return RunData(
            config_size=self.cfg.total_nodes,
            mode=self.cfg.mode,
            job_outcomes=outcomes,
            ws_series=self.ws_series,
            utilization_series=self.util_series,
            demand=self.demand,
            sim_end=self.now,
            trace_hash=metrics.trace_identity(list(self.jobs) + list(self.rejected), self.demand),
            rejected_count=len(self.rejected),
            static_split=split,
        )


def _note(rows: list, now: float, values: tuple) -> None:
    # Within one instant only the final value survives; equal neighbors merge.
    if rows and rows[-1][0] == now:
        rows.pop()
    if not rows or rows[-1][1:] != values:
        rows.append((now,) + values)


def run(jobs: Sequence[JobRecord], demand: DemandSeries, cfg: SimConfig,
        event_log: Optional[IO[str]] = None) -> RunReport:
    """Simulate one configuration and return its finished report."""
    data = _Sim(jobs, demand, cfg, event_log).execute()
    return metrics.finalize(data)
