"""Synthetic workload builders for the test suite.

Everything here is deterministic given a seed (CONSOLIDSIM_SEED overrides
the default when regenerating the frozen fixture files).
"""

from __future__ import annotations

import os
import random
from pathlib import Path

from consolidsim.engine import DYNAMIC, STATIC, SimConfig
from consolidsim.traces import DemandSeries, JobRecord, format_swf

from .oracles import OJob, OracleConfig

FIXTURES = Path(__file__).parent / "fixtures"

DEFAULT_SEED = int(os.environ.get("CONSOLIDSIM_SEED", "0"))


def random_instance(rng: random.Random) -> tuple[list[OJob], list[tuple[int, int]], int, OracleConfig]:
    """A small integer-time instance for engine-vs-oracle comparison."""
    total = rng.randint(2, 10)
    static = rng.random() < 0.25
    if static:
        st = rng.randint(1, total - 1)
        cfg = OracleConfig(total=total, mode="static", split=(st, total - st),
                           delay=rng.randint(0, 7), strict_fifo=rng.random() < 0.3)
        max_size = st
    else:
        cfg = OracleConfig(total=total, mode="dynamic", delay=rng.randint(0, 7),
                           strict_fifo=rng.random() < 0.3)
        max_size = total - 1

    jobs = []
    for jid in range(rng.randint(1, 20)):
        jobs.append(OJob(
            job_id=jid + 1,
            submit=rng.randint(0, 200),
            runtime=rng.randint(1, 60),
            size=rng.randint(1, max(1, min(max_size + 2, total))),  # a few rejections allowed
        ))

    samples = []
    t = 0 if rng.random() < 0.8 else rng.randint(1, 20)  # series may start late
    value = rng.randint(1, total + 2)  # demand may exceed the pool
    samples.append((t, value))
    for _ in range(rng.randint(0, 9)):
        t += rng.randint(1, 40)
        nxt = rng.randint(1, total + 2)
        if nxt == value:
            nxt = value + 1
        samples.append((t, nxt))
        value = nxt
    duration = t + rng.randint(0, 50)
    return jobs, samples, duration, cfg


def to_engine_inputs(jobs: list[OJob], samples: list[tuple[int, int]], duration: int,
                     cfg: OracleConfig) -> tuple[list[JobRecord], DemandSeries, SimConfig]:
    records = [JobRecord(j.job_id, j.submit, j.runtime, j.size, j.size) for j in jobs]
    demand = DemandSeries(tuple(samples), duration=duration)
    if cfg.mode == "static":
        sim_cfg = SimConfig(cfg.total, STATIC, static_split=cfg.split,
                            realloc_delay=cfg.delay, strict_fifo=cfg.strict_fifo)
    else:
        sim_cfg = SimConfig(cfg.total, DYNAMIC, realloc_delay=cfg.delay,
                            strict_fifo=cfg.strict_fifo)
    return records, demand, sim_cfg


# -- the frozen desk-scale consolidation fixture ---------------------------
#
# Cluster economics the fixture encodes: three 7-node jobs arrive every
# 600 s and run 400 s. A 20-node dedicated batch pool fits only two at a
# time, so one job per wave queues behind the others; a 22-node shared pool
# (web tier at its 1-node floor) fits all three at once. The web tier
# spikes from 1 to 9 nodes only while the batch tier is drained
# (405 s..555 s into each wave), so consolidation never kills anything.

DESK_CYCLES = 14
DESK_CYCLE_LEN = 600
DESK_RUNTIME = 400
DESK_JOB_SIZE = 7
DESK_JOBS_PER_CYCLE = 3
DESK_SPIKE = (405, 555, 9)
DESK_STATIC_SPLIT = (20, 9)
DESK_DYNAMIC_TOTAL = 22


def desk_jobs() -> list[JobRecord]:
    jobs = []
    jid = 0
    for c in range(DESK_CYCLES):
        for _ in range(DESK_JOBS_PER_CYCLE):
            jid += 1
            jobs.append(JobRecord(jid, c * DESK_CYCLE_LEN, DESK_RUNTIME,
                                  DESK_JOB_SIZE, DESK_JOB_SIZE))
    return jobs


def desk_demand() -> DemandSeries:
    rise, fall, peak = DESK_SPIKE
    samples = [(0, 1)]
    for c in range(DESK_CYCLES):
        base = c * DESK_CYCLE_LEN
        samples.append((base + rise, peak))
        samples.append((base + fall, 1))
    return DemandSeries(tuple(samples), duration=samples[-1][0])


def write_desk_fixtures(directory: Path = FIXTURES) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "desk_heavy.swf").write_text(
        "; synthetic heavy batch workload for a 20-node pool\n"
        "; procs_per_node = 1\n" + format_swf(desk_jobs()))
    lines = ["timestamp_seconds,demand_nodes"]
    lines += [f"{t},{d}" for t, d in desk_demand().samples]
    (directory / "desk_spiky_demand.csv").write_text("\n".join(lines) + "\n")


# -- tiny fixture exercised by the CLI golden test --------------------------

def tiny_jobs() -> list[JobRecord]:
    raw = [
        # (id, submit, runtime, nodes)
        (1, 0, 100, 1),
        (2, 0, 40, 2),
        (3, 30, 80, 3),
        (4, 60, 20, 1),
        (5, 90, 50, 2),
    ]
    return [JobRecord(i, s, r, n, n) for i, s, r, n in raw]


def tiny_demand() -> DemandSeries:
    return DemandSeries(((0, 1), (50, 3), (120, 2)), duration=200)


def write_tiny_fixtures(directory: Path = FIXTURES) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "tiny.swf").write_text("; tiny smoke-test trace (procs_per_node = 1)\n"
                                        + format_swf(tiny_jobs()))
    lines = ["timestamp_seconds,demand_nodes"]
    lines += [f"{t},{d}" for t, d in tiny_demand().samples]
    (directory / "tiny_demand.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    write_desk_fixtures()
    write_tiny_fixtures()
    print(f"fixtures written to {FIXTURES}")
