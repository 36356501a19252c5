"""Node pool bookkeeping: who holds which node at any instant.

Every node id in ``range(total_nodes)`` is in exactly one of: the
provisioner's idle set, the batch tier's free set, a running job's
assignment, the web tier's held set, or an in-transit batch-to-web
reallocation. All moves pick lowest-numbered ids first so runs are
deterministic. One simulation run owns a state exclusively; nothing here
is thread-safe by design.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConservationError, InsufficientIdleError, UnknownJobError

ST = "ST"
WS = "WS"


@dataclass
class TransitBatch:
    """Nodes moving from the batch tier to the web tier."""

    nodes: frozenset[int]
    ready_time: float


@dataclass
class ClusterState:
    total_nodes: int
    idle: set[int] = field(default_factory=set)
    st_free: set[int] = field(default_factory=set)
    st_busy: dict[int, set[int]] = field(default_factory=dict)
    ws_held: set[int] = field(default_factory=set)
    in_transit: list[TransitBatch] = field(default_factory=list)

    def __post_init__(self):
        if self.total_nodes <= 0:
            raise ValueError("total_nodes must be > 0")
        if not (self.idle or self.st_free or self.st_busy or self.ws_held or self.in_transit):
            self.idle = set(range(self.total_nodes))

    # -- queries ---------------------------------------------------------

    def st_busy_count(self) -> int:
        return sum(len(s) for s in self.st_busy.values())

    def transit_count(self) -> int:
        return sum(len(b.nodes) for b in self.in_transit)

    def conservation_check(self) -> bool:
        """True iff the sets partition range(total_nodes) exactly."""
        groups = [self.idle, self.st_free, self.ws_held]
        groups.extend(self.st_busy.values())
        groups.extend(set(b.nodes) for b in self.in_transit)
        combined: set[int] = set()
        count = 0
        for g in groups:
            combined |= g
            count += len(g)
        return count == self.total_nodes and combined == set(range(self.total_nodes))

    def assert_conserved(self) -> None:
        if not self.conservation_check():
            raise ConservationError(
                f"node partition broken: idle={len(self.idle)} st_free={len(self.st_free)} "
                f"st_busy={self.st_busy_count()} ws={len(self.ws_held)} "
                f"transit={self.transit_count()} total={self.total_nodes}"
            )

    # -- moves -----------------------------------------------------------

    @staticmethod
    def _take(source: set[int], count: int) -> set[int]:
        picked = set(sorted(source)[:count])
        source -= picked
        return picked

    def allocate(self, target: str, count: int) -> set[int]:
        """Move count idle nodes to the batch tier's free set or the web tier.

        Idle nodes move immediately; batch-to-web reallocations never pass
        through here (see begin_transit).
        """
        if count < 0:
            raise ValueError("count must be >= 0")
        if count > len(self.idle):
            raise InsufficientIdleError(f"asked for {count} idle nodes, only {len(self.idle)} available")
        moved = self._take(self.idle, count)
        if target == ST:
            self.st_free |= moved
        elif target == WS:
            self.ws_held |= moved
        else:
            raise ValueError(f"unknown allocation target {target!r}")
        return moved

    def bind_job(self, job_id: int, count: int) -> set[int]:
        """Assign count free batch nodes to a job."""
        if count < 1:
            raise ValueError("a job binding needs at least one node")
        if job_id in self.st_busy:
            raise ValueError(f"job {job_id} already bound")
        if count > len(self.st_free):
            raise InsufficientIdleError(f"job {job_id} needs {count} nodes, batch tier has {len(self.st_free)} free")
        nodes = self._take(self.st_free, count)
        self.st_busy[job_id] = nodes
        return set(nodes)

    def release_job(self, job_id: int) -> set[int]:
        """Return a job's nodes to the batch free set (completion or kill)."""
        try:
            nodes = self.st_busy.pop(job_id)
        except KeyError:
            raise UnknownJobError(f"job {job_id} holds no nodes") from None
        self.st_free |= nodes
        return set(nodes)

    def begin_transit(self, count: int, ready_time: float) -> TransitBatch:
        """Pull count nodes out of the batch free set for delayed web handoff."""
        if count > len(self.st_free):
            raise InsufficientIdleError(f"cannot transit {count} nodes, batch tier has {len(self.st_free)} free")
        batch = TransitBatch(frozenset(self._take(self.st_free, count)), ready_time)
        self.in_transit.append(batch)
        return batch

    def finish_transit(self, batch: TransitBatch) -> set[int]:
        """Deliver an in-transit batch to the web tier."""
        self.in_transit.remove(batch)
        self.ws_held |= batch.nodes
        return set(batch.nodes)

    def ws_release(self, count: int) -> set[int]:
        """Web tier hands surplus nodes back to the provisioner."""
        if count > len(self.ws_held):
            raise ValueError(f"web tier holds {len(self.ws_held)} nodes, cannot release {count}")
        released = self._take(self.ws_held, count)
        self.idle |= released
        return released
