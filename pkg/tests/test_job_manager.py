import threading
import time

import pytest
from lfpcodec.errors import ConfigurationError, UsageError
from lfpcodec.jobs.manager import SweepManager
from lfpcodec.jobs.models import JobStatus


@pytest.fixture
def manager():
    return SweepManager(threads=2)


def test_thread_count_must_be_positive():
    with pytest.raises(UsageError):
        SweepManager(threads=0)


def test_thread_count_defaults_from_the_environment(monkeypatch):
    monkeypatch.setenv("LFP_THREADS", "3")
    assert SweepManager().threads == 3
    monkeypatch.setenv("LFP_THREADS", "four")
    with pytest.raises(ConfigurationError, match="LFP_THREADS"):
        SweepManager()


def test_create_job_returns_pending_job(manager):
    job = manager.create_job(30)
    assert job.job_id
    assert job.qp == 30
    assert job.status == JobStatus.PENDING
    assert manager.get_job(job.job_id) is job


def test_get_job_returns_none_for_missing(manager):
    assert manager.get_job("nonexistent") is None


async def test_results_come_back_in_qp_order(manager):
    results = await manager.run([31, 25, 28], lambda qp: qp * 10)
    assert results == [250, 280, 310]
    assert [job.qp for job in manager.jobs] == [25, 28, 31]
    assert all(job.status == JobStatus.COMPLETED for job in manager.jobs)
    assert all(job.finished_at is not None for job in manager.jobs)


async def test_at_most_threads_jobs_run_at_once(manager):
    lock = threading.Lock()
    active = peak = 0

    def work(qp):
        nonlocal active, peak
        with lock:
            active += 1
            peak = max(peak, active)
        time.sleep(0.02)
        with lock:
            active -= 1
        return qp

    assert await manager.run(range(25, 31), work) == list(range(25, 31))
    assert peak <= 2


async def test_lowest_failing_qp_is_reraised(manager):
    def work(qp):
        if qp in (27, 29):
            raise ValueError(f"qp {qp} exploded")
        return qp

    with pytest.raises(ValueError, match="qp 27"):
        await manager.run([29, 25, 27], work)
    failed = [job for job in manager.jobs if job.status == JobStatus.FAILED]
    assert sorted(job.qp for job in failed) == [27, 29]
    assert all(job.error.endswith("exploded") for job in failed)


async def test_empty_and_repeated_qp_lists_rejected(manager):
    with pytest.raises(UsageError):
        await manager.run([], lambda qp: qp)
    with pytest.raises(UsageError, match="repeats"):
        await manager.run([25, 25], lambda qp: qp)
