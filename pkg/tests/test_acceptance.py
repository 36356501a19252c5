"""Acceptance criteria, one test per criterion, each printing a verdict line.

Criterion 5 needs the real public traces (not vendored); it skips unless
they have been fetched (see scripts/fetch_traces.py and the README
walkthrough) into ./traces or $CONSOLIDSIM_TRACES.
"""

import gzip
import os
import random
import time
from pathlib import Path

import pytest

from consolidsim.autoscaler import AutoscalerConfig, derive_demand
from consolidsim.engine import DYNAMIC, STATIC, SimConfig, run
from consolidsim.metrics import compare
from consolidsim.policies import (
    DecisionKind,
    RunningJobView,
    kill_order,
    provision_on_ws_claim,
    st_release_plan,
)
from consolidsim.scheduler import JobQueue, schedule_pass
from consolidsim.traces import (
    JobRecord,
    RequestSeries,
    load_swf,
    parse_demand_series,
    window_jobs,
    window_start_for_instant,
)

from .harness import assert_engine_matches_oracle, run_twice_bytes
from .oracles import scaler_loop
from .synth import (
    DESK_DYNAMIC_TOTAL,
    DESK_STATIC_SPLIT,
    FIXTURES,
    random_instance,
)

TRACES_DIR = Path(os.environ.get("CONSOLIDSIM_TRACES", Path(__file__).parent.parent / "traces"))


def _verdict(n: int, text: str) -> None:
    print(f"\nACCEPTANCE {n}: PASS - {text}")


def test_criterion_1_oracle_equivalence():
    t0 = time.time()
    rng = random.Random(20260810)
    cases = 250
    for i in range(cases):
        jobs, samples, duration, cfg = random_instance(rng)
        assert_engine_matches_oracle(jobs, samples, duration, cfg, context=f"case {i}")
    elapsed = time.time() - t0
    assert elapsed < 30, f"took {elapsed:.1f}s"
    _verdict(1, f"{cases} randomized instances match the stepped oracle exactly "
                f"({elapsed:.1f}s)")


def test_criterion_2_policy_property_suite():
    rng = random.Random(777)
    cases = 1000

    for _ in range(cases):  # kill_order: permutation + victim prefix
        running = [RunningJobView(j, rng.randint(1, 20), rng.randint(0, 500))
                   for j in rng.sample(range(1, 4000), rng.randint(1, 25))]
        ordered = kill_order(running)
        assert sorted(v.job_id for v in ordered) == sorted(v.job_id for v in running)
        keys = [(v.size, v.elapsed, v.job_id) for v in ordered]
        assert keys == sorted(keys)
        st_free = rng.randint(0, 10)
        capacity = st_free + sum(v.size for v in running)
        demand = rng.randint(1, max(capacity, 1))
        if demand > capacity:
            continue
        plan = st_release_plan(demand, st_free, running)
        kills = [d for d in plan if d.kind is DecisionKind.KILL_JOBS]
        if st_free >= demand:
            assert not kills
        else:
            victims = list(kills[0].victim_jobs)
            assert victims == [v.job_id for v in ordered[: len(victims)]]
            sizes = {v.job_id: v.size for v in running}
            assert st_free + sum(sizes[v] for v in victims) >= demand
            assert st_free + sum(sizes[v] for v in victims[:-1]) < demand  # greedy-minimal

    for _ in range(cases):  # provisioner grant/reclaim split
        claim = rng.randint(1, 400)
        idle = rng.randint(0, 400)
        decisions = provision_on_ws_claim(claim, idle)
        granted = sum(d.node_count for d in decisions if d.kind is DecisionKind.GRANT_TO_WS)
        reclaimed = sum(d.node_count for d in decisions if d.kind is DecisionKind.RECLAIM_FROM_ST)
        assert granted == min(claim, idle)
        assert granted + reclaimed == claim

    cfg = AutoscalerConfig(capacity_per_instance=100.0)
    for _ in range(cases):  # hysteresis stability under constant load
        rate = rng.uniform(0, 560)
        horizon = 20 * (int(rate / 80) + 4) + 120
        series = derive_demand(RequestSeries(((0, rate),), duration=horizon), cfg)
        assert series.samples[-1][0] <= horizon - 100
        values = [d for _, d in series.samples]
        assert all(v >= 1 for v in values)
        assert all(abs(b - a) == 1 for a, b in zip(values, values[1:]))

    for _ in range(cases):  # scheduler: no oversubscription, work conservation
        queue = JobQueue()
        for jid in range(1, rng.randint(2, 25)):
            size = rng.randint(1, 15)
            queue.enqueue(JobRecord(jid, rng.randint(0, 50), 10, size, size))
        free = rng.randint(0, 40)
        picked = schedule_pass(queue, free)
        sizes = {j.job_id: j.requested_nodes for j in queue.pending}
        used = sum(sizes[i] for i in picked)
        assert used <= free
        left = free - used
        assert all(sizes[j.job_id] > left for j in queue.pending if j.job_id not in set(picked))

    _verdict(2, f"{cases} cases per policy property, zero failures")


def test_criterion_3_conservation_and_determinism():
    rng = random.Random(99031)
    runs = 200
    for i in range(runs):
        jobs, samples, duration, cfg = random_instance(rng)
        # check_invariants=True (the default) asserts the node partition
        # after every event inside the engine; any breach raises.
        j1, j2, l1, l2 = run_twice_bytes(jobs, samples, duration, cfg)
        assert j1 == j2, f"reports differ on case {i}"
        assert l1 == l2, f"event logs differ on case {i}"
    _verdict(3, f"{runs} randomized runs: partition invariant held at every event, "
                f"reports and logs byte-identical across executions")


def test_criterion_4_desk_scale_trend():
    t0 = time.time()
    with open(FIXTURES / "desk_heavy.swf") as fh:
        jobs = list(load_swf(fh, procs_per_node=1).records)
    with open(FIXTURES / "desk_spiky_demand.csv") as fh:
        demand = parse_demand_series(fh)
    assert demand.peak() == 9

    static_total = sum(DESK_STATIC_SPLIT)
    static = run(jobs, demand, SimConfig(static_total, STATIC, static_split=DESK_STATIC_SPLIT))
    dynamic = run(jobs, demand, SimConfig(DESK_DYNAMIC_TOTAL, DYNAMIC))

    assert dynamic.completed_count >= static.completed_count
    assert dynamic.mean_turnaround <= static.mean_turnaround
    # the windowed view agrees, so the conclusion does not hinge on the
    # run-to-completion accounting choice
    assert dynamic.completed_in_window >= static.completed_in_window
    for report in (static, dynamic):
        assert report.completed_count + report.killed_count == report.submitted_count
        assert not [o for o in report.job_outcomes if o.state == "queued"]
    elapsed = time.time() - t0
    assert elapsed < 10
    _verdict(4, f"dynamic {DESK_DYNAMIC_TOTAL} nodes vs static {static_total}: "
                f"completed {dynamic.completed_count} >= {static.completed_count}, "
                f"turnaround {dynamic.mean_turnaround:.0f}s <= {static.mean_turnaround:.0f}s "
                f"({elapsed:.1f}s)")


def _real_trace_paths():
    swf = None
    for name in ("SDSC-BLUE-2000-4.2-cln.swf", "SDSC-BLUE-2000-4.2-cln.swf.gz",
                 "sdsc_blue.swf", "sdsc_blue.swf.gz"):
        cand = TRACES_DIR / name
        if cand.is_file():
            swf = cand
            break
    demand = TRACES_DIR / "wc98_demand.csv"
    return swf, (demand if demand.is_file() else None)


@pytest.mark.skipif(_real_trace_paths()[0] is None or _real_trace_paths()[1] is None,
                    reason="real traces not fetched (scripts/fetch_traces.py); "
                           "criterion 5 is conditional on trace download")
def test_criterion_5_paper_scale_reproduction():
    t0 = time.time()
    swf_path, demand_path = _real_trace_paths()
    opener = gzip.open if swf_path.suffix == ".gz" else open
    with opener(swf_path, "rt") as fh:
        meta = load_swf(fh, procs_per_node=8)
    start = window_start_for_instant(meta, 956700003)  # 2000-04-25 15:00:03 -07:00
    two_weeks = 14 * 86400
    jobs = window_jobs(list(meta.records), start, two_weeks)
    assert len(jobs) == 2672, f"windowed job count {len(jobs)}"

    with open(demand_path) as fh:
        demand = parse_demand_series(fh)
    assert demand.peak() == 64, f"demand peak {demand.peak()}"

    reports = [run(jobs, demand, SimConfig(208, STATIC, static_split=(144, 64)))]
    for size in (200, 190, 180, 170, 160, 150):
        reports.append(run(jobs, demand, SimConfig(size, DYNAMIC)))
    by_size = {r.config_size: r for r in reports}
    static, dyn160 = by_size[208], by_size[160]

    # benefit comparison over the two-week horizon (the all-time counts are
    # reported alongside; killed jobs never finish, so all-time completion
    # cannot exceed a kill-free baseline by construction)
    assert dyn160.completed_in_window >= static.completed_in_window
    assert dyn160.mean_turnaround_in_window <= static.mean_turnaround_in_window

    killed = {size: by_size[size].killed_count for size in (200, 190, 180, 170, 160, 150)}
    order = [200, 190, 180, 170, 160, 150]
    for hi, lo in zip(order, order[1:]):
        if 170 in (hi, lo):
            continue  # the one documented exception in the source experiment
        assert killed[lo] >= killed[hi], f"killed({lo}) < killed({hi})"

    elapsed = time.time() - t0
    assert elapsed < 300
    rows = compare(reports)
    assert any(abs(row["cost_ratio"] - 0.769) < 1e-9 for row in rows)
    _verdict(5, f"2672 jobs, peak 64, 160-node sweep beats the 208 static baseline "
                f"in-window ({elapsed:.0f}s)")


def test_criterion_6_autoscaler_oracle():
    rng = random.Random(60455)
    cfg = AutoscalerConfig(capacity_per_instance=100.0)
    cases = 100
    for _ in range(cases):
        samples = [(0, rng.uniform(0, 1500))]
        t = 0
        for _ in range(rng.randint(0, 12)):
            t += rng.randint(1, 80)
            samples.append((t, rng.uniform(0, 1500)))
        duration = t + rng.randint(0, 80)
        series = RequestSeries(tuple(samples), duration=duration)
        got = derive_demand(series, cfg).samples
        want = tuple(scaler_loop(samples, duration, capacity=100.0))
        assert got == want
        values = [d for _, d in got]
        assert all(v >= 1 for v in values)
        assert all(abs(b - a) == 1 for a, b in zip(values, values[1:]))
    _verdict(6, f"{cases} randomized series match the scalar-loop oracle exactly; "
                f"floor and unit-step invariants held")
