"""Cooperative provisioning policies as pure decision functions.

Three parties: the provisioner arbitrates the shared pool, the batch (ST)
tier runs jobs, and the web (WS) tier serves load. Web demand outranks
batch demand; idle nodes always flow to the batch tier; a web claim the
idle pool cannot cover forces the batch tier to give nodes back, killing
jobs if its free pool is short. Everything here is stateless: same inputs,
same decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import InfeasibleReclaimError


class DecisionKind(Enum):
    GRANT_IDLE_TO_ST = "GrantIdleToST"
    RECLAIM_FROM_ST = "ReclaimFromST"
    GRANT_TO_WS = "GrantToWS"
    RELEASE_TO_PROVISIONER = "ReleaseToProvisioner"
    KILL_JOBS = "KillJobs"


@dataclass(frozen=True)
class RunningJobView:
    """What the kill policy sees of a running job."""

    job_id: int
    size: int
    elapsed: float


@dataclass(frozen=True)
class ReclaimOrder:
    """A forced batch-tier release: how many nodes, and the handoff delay."""

    demanded: int
    deadline_hint: float = 0.0

    def __post_init__(self):
        if self.demanded < 1:
            raise ValueError("a reclaim must demand at least one node")


@dataclass(frozen=True)
class PolicyDecision:
    kind: DecisionKind
    node_count: int = 0
    victim_jobs: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.node_count < 0:
            raise ValueError("node_count must be >= 0")
        if (self.kind is DecisionKind.KILL_JOBS) != bool(self.victim_jobs):
            raise ValueError("victim_jobs must be non-empty exactly for KillJobs decisions")


def provision_on_idle(idle_count: int) -> PolicyDecision:
    """All idle nodes go to the batch tier (a 0-count decision is a no-op)."""
    if idle_count < 0:
        raise ValueError("idle_count must be >= 0")
    return PolicyDecision(DecisionKind.GRANT_IDLE_TO_ST, idle_count)


def provision_on_ws_claim(claim: int, idle_count: int) -> list[PolicyDecision]:
    """Serve a web-tier claim: idle nodes first, forced reclaim for the rest.

    Web demand is always treated as urgent, so any shortfall is reclaimed
    from the batch tier rather than queued.
    """
    if claim < 1:
        raise ValueError("claim must be >= 1")
    if idle_count < 0:
        raise ValueError("idle_count must be >= 0")
    decisions = []
    granted = min(claim, idle_count)
    if granted:
        decisions.append(PolicyDecision(DecisionKind.GRANT_TO_WS, granted))
    if claim > granted:
        decisions.append(PolicyDecision(DecisionKind.RECLAIM_FROM_ST, claim - granted))
    return decisions


def kill_order(running: list[RunningJobView]) -> list[RunningJobView]:
    """Victim ordering for forced release: smallest first, then shortest-running.

    Job id breaks remaining ties so the order is total.
    """
    return sorted(running, key=lambda j: (j.size, j.elapsed, j.job_id))


def st_release_plan(demand: int, st_free: int, running: list[RunningJobView]) -> list[PolicyDecision]:
    """How the batch tier frees ``demand`` nodes.

    Free nodes are released as-is; if they fall short, victims are killed in
    kill_order until the freed total covers the demand. Surplus from the last
    victim stays with the batch tier. Raises InfeasibleReclaimError when the
    batch tier does not hold enough nodes in total.
    """
    if demand < 1:
        raise ValueError("demand must be >= 1")
    if st_free >= demand:
        return [PolicyDecision(DecisionKind.RELEASE_TO_PROVISIONER, demand)]
    if demand > st_free + sum(j.size for j in running):
        raise InfeasibleReclaimError(
            f"demand {demand} exceeds batch holdings ({st_free} free + {sum(j.size for j in running)} running)"
        )
    victims = []
    freed_by_kills = 0
    for job in kill_order(running):
        victims.append(job.job_id)
        freed_by_kills += job.size
        if st_free + freed_by_kills >= demand:
            break
    return [
        PolicyDecision(DecisionKind.KILL_JOBS, freed_by_kills, tuple(victims)),
        PolicyDecision(DecisionKind.RELEASE_TO_PROVISIONER, demand),
    ]


def ws_adjust(current_held: int, new_demand: int) -> PolicyDecision | None:
    """Web tier reaction to a demand level: release surplus or claim the gap.

    Returns None when holdings already match demand.
    """
    if new_demand < 1:
        raise ValueError("new_demand must be >= 1")
    if current_held < 0:
        raise ValueError("current_held must be >= 0")
    if current_held > new_demand:
        return PolicyDecision(DecisionKind.RELEASE_TO_PROVISIONER, current_held - new_demand)
    if current_held < new_demand:
        return PolicyDecision(DecisionKind.GRANT_TO_WS, new_demand - current_held)
    return None
