import datetime
import threading
from collections import OrderedDict, deque
from dataclasses import dataclass

from cehpo.jobs.jobs import JobsDataSource, JobStatus


@dataclass
class MemoryJob:
    job_id: str
    status: JobStatus = JobStatus.PENDING
    created: datetime.datetime | None = None
    started: datetime.datetime | None = None
    finished: datetime.datetime | None = None
    error: str | None = None


class _Run:
    def __init__(self):
        self.jobs: OrderedDict[str, MemoryJob] = OrderedDict()
        self.pending: deque[str] = deque()


class MemoryJobsDataSource(JobsDataSource):
    """
    Keeps jobs in process memory behind a single lock. Jobs are popped in creation order.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._runs: dict[str, _Run] = {}

    def _run(self, run_id: str) -> _Run:
        return self._runs.setdefault(run_id, _Run())

    def create_jobs(self, run_id: str, job_ids: list[str]):
        with self._lock:
            run = self._run(run_id)
            for job_id in job_ids:
                if job_id in run.jobs:
                    continue
                run.jobs[job_id] = MemoryJob(job_id, created=datetime.datetime.now())
                run.pending.append(job_id)

    def requeue_jobs(self, run_id: str, status: JobStatus):
        with self._lock:
            run = self._run(run_id)
            for job in run.jobs.values():
                if job.status != status:
                    continue
                job.status = JobStatus.PENDING
                job.started = job.finished = job.error = None
                run.pending.append(job.job_id)

    def pop_job(self, run_id: str) -> str | None:
        with self._lock:
            run = self._run(run_id)
            if not run.pending:
                return None
            job = run.jobs[run.pending.popleft()]
            job.status = JobStatus.STARTED
            job.started = datetime.datetime.now()
            return job.job_id

    def complete_job(self, run_id: str, job_id: str, error: str | None = None):
        with self._lock:
            job = self._run(run_id).jobs[job_id]
            job.status = JobStatus.FINISHED if error is None else JobStatus.FAILED
            job.error = error
            job.finished = datetime.datetime.now()

    def count_jobs(self, run_id: str, status: JobStatus | None = None) -> int:
        with self._lock:
            return sum(1 for job in self._run(run_id).jobs.values() if status is None or job.status == status)

    def get_errors(self, run_id: str) -> dict[str, str]:
        with self._lock:
            return {job.job_id: job.error for job in self._run(run_id).jobs.values()
                    if job.status == JobStatus.FAILED}

    def delete_jobs(self, run_id: str):
        with self._lock:
            self._runs.pop(run_id, None)
