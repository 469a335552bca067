import time

from lfpcodec.jobs.models import JobStatus, SweepJob


def test_job_defaults():
    job = SweepJob(qp=25)
    assert job.job_id
    assert job.status == JobStatus.PENDING
    assert job.error is None
    assert job.result is None
    assert job.finished_at is None
    assert not job.done
    assert job.created_at <= time.time()


def test_job_id_unique():
    assert SweepJob(qp=25).job_id != SweepJob(qp=25).job_id


def test_done_for_finished_states():
    assert SweepJob(qp=25, status=JobStatus.COMPLETED).done
    assert SweepJob(qp=25, status=JobStatus.FAILED).done
    assert not SweepJob(qp=25, status=JobStatus.RUNNING).done


def test_job_status_values():
    assert JobStatus.PENDING == "pending"
    assert JobStatus.RUNNING == "running"
    assert JobStatus.COMPLETED == "completed"
    assert JobStatus.FAILED == "failed"
