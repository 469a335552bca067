import asyncio
import logging
import time
from collections.abc import Callable, Iterable
from typing import Any

from ..config import default_threads
from ..errors import UsageError
from .models import JobStatus, SweepJob

logger = logging.getLogger(__name__)


class SweepManager:
    """Runs one job per QP on worker threads, at most `threads` at a time."""

    def __init__(self, threads: int | None = None) -> None:
        if threads is None:
            threads = default_threads()
        if threads < 1:
            raise UsageError(f"thread count must be positive, got {threads}")
        self.threads = threads
        self._jobs: dict[str, SweepJob] = {}

    def create_job(self, qp: int) -> SweepJob:
        job = SweepJob(qp=qp)
        self._jobs[job.job_id] = job
        return job

    def get_job(self, job_id: str) -> SweepJob | None:
        return self._jobs.get(job_id)

    @property
    def jobs(self) -> list[SweepJob]:
        return list(self._jobs.values())

    async def _run_job(
        self,
        job: SweepJob,
        work: Callable[[int], Any],
        slots: asyncio.Semaphore,
    ) -> None:
        async with slots:
            job.status = JobStatus.RUNNING
            try:
                job.result = await asyncio.to_thread(work, job.qp)
                job.status = JobStatus.COMPLETED
                logger.info("qp %d done", job.qp)
            except Exception as exc:
                job.status = JobStatus.FAILED
                job.error = str(exc)
                job.result = exc
                logger.info("qp %d failed: %s", job.qp, exc)
            finally:
                job.finished_at = time.time()

    async def run(self, qps: Iterable[int], work: Callable[[int], Any]) -> list[Any]:
        """Results ordered by QP; the failure at the lowest QP is re-raised."""
        qps = sorted(qps)
        if not qps:
            raise UsageError("no QPs to sweep")
        if len(set(qps)) != len(qps):
            raise UsageError("QP list repeats a value")
        slots = asyncio.Semaphore(self.threads)
        jobs = [self.create_job(qp) for qp in qps]
        await asyncio.gather(*(self._run_job(job, work, slots) for job in jobs))
        for job in jobs:
            if job.status is JobStatus.FAILED:
                raise job.result
        return [job.result for job in jobs]
