"""First-fit batch scheduler over a submission-ordered queue.

The default policy scans the whole queue and starts every job that fits in
the free nodes at that moment, skipping jobs that do not; large jobs can
therefore starve behind a stream of small ones. A strict-FIFO variant that
blocks at the first non-fitting job is available for sensitivity runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import QueueIntegrityError
from .traces import JobRecord


@dataclass
class JobQueue:
    """Pending jobs ordered by (submit_time, job_id)."""

    pending: list[JobRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pending)

    def enqueue(self, job: JobRecord) -> None:
        if any(j.job_id == job.job_id for j in self.pending):
            raise QueueIntegrityError(f"job {job.job_id} is already queued")
        self.pending.append(job)
        self.pending.sort(key=lambda j: (j.submit_time, j.job_id))

    def dequeue_selected(self, ids: list[int]) -> list[JobRecord]:
        """Remove the given jobs (all must be present), preserving queue order."""
        wanted = set(ids)
        if len(wanted) != len(ids):
            raise QueueIntegrityError("duplicate ids in dequeue request")
        present = {j.job_id for j in self.pending}
        missing = wanted - present
        if missing:
            raise QueueIntegrityError(f"jobs not queued: {sorted(missing)}")
        taken = [j for j in self.pending if j.job_id in wanted]
        self.pending = [j for j in self.pending if j.job_id not in wanted]
        return taken


def schedule_pass(queue: JobQueue, free_nodes: int, strict_fifo: bool = False) -> list[int]:
    """Pick the jobs to start given the current free batch nodes.

    Scans the queue in order, selecting each job whose size fits in the
    remaining budget. Non-fitting jobs are skipped (or, with strict_fifo,
    block the scan). Pure: the queue is not modified; the caller removes
    the selected ids via dequeue_selected.
    """
    if free_nodes < 0:
        raise ValueError("free_nodes must be >= 0")
    selected = []
    remaining = free_nodes
    for job in queue.pending:
        if job.requested_nodes <= remaining:
            selected.append(job.job_id)
            remaining -= job.requested_nodes
        elif strict_fifo:
            break
    return selected
