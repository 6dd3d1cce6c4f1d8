import logging
import threading
import time
import uuid
from abc import ABC, abstractmethod
from enum import Enum
from typing import Callable

logger = logging.getLogger(__name__)

PROGRESS_INTERVAL_SECONDS = 1.0


class JobStatus(Enum):
    PENDING = "pending"
    STARTED = "started"
    FINISHED = "finished"
    FAILED = "failed"

    def __str__(self):
        return self.value

    def to_str(self):
        return self.value

    @staticmethod
    def from_str(s: str):
        for status in JobStatus:
            if status.value == s:
                return status
        raise ValueError(f"Invalid job status: {s}")


class JobsDataSource(ABC):
    """
    Stores the jobs of one or more runs. A job is identified by (run_id, job_id). Implementations must be safe to use
    from several worker threads at once.
    """

    @abstractmethod
    def create_jobs(self, run_id: str, job_ids: list[str]):
        """
        Adds pending jobs, popped in the given order. Job IDs that already exist in the run are skipped.
        """
        pass

    @abstractmethod
    def requeue_jobs(self, run_id: str, status: JobStatus):
        """
        Puts every job with the given status back to pending and clears its error.
        """
        pass

    @abstractmethod
    def pop_job(self, run_id: str) -> str | None:
        """
        Marks the oldest pending job as started and returns its ID, None if nothing is pending.
        """
        pass

    @abstractmethod
    def complete_job(self, run_id: str, job_id: str, error: str | None = None):
        """
        Marks a started job as finished, or as failed if an error message is given.
        """
        pass

    @abstractmethod
    def count_jobs(self, run_id: str, status: JobStatus | None = None) -> int:
        pass

    @abstractmethod
    def get_errors(self, run_id: str) -> dict[str, str]:
        """
        :return: a dict from failed job ID to its error message
        """
        pass

    @abstractmethod
    def delete_jobs(self, run_id: str):
        pass


class JobHandler:
    """
    Works through the jobs of one run with a pool of worker threads. Handlers communicate results through their own
    state (usually by writing into a slot addressed by the job ID), the handler only tracks status and errors.

    :param label: names the run in log messages
    :param data_source: where the jobs are kept
    :param run_id: (optional) the run ID, a fresh UUID by default
    """

    def __init__(self, label: str, data_source: JobsDataSource, run_id: str | None = None):
        self.label = label
        self.data_source = data_source
        self.run_id = run_id if run_id is not None else str(uuid.uuid4())

    def create_jobs(self, job_ids: list[str]):
        self.data_source.create_jobs(self.run_id, job_ids)

    def reset_failed_jobs(self):
        self.data_source.requeue_jobs(self.run_id, JobStatus.FAILED)

    def iterate_jobs(self, handler: Callable[[str], None], threads: int = 1, progress: bool = False,
                     max_consecutive_errors: int | None = None):
        """
        Runs handler on every pending job until none is left. A job whose handler raises is marked as failed and the
        iteration continues, unless more than max_consecutive_errors jobs fail in a row on one worker.
        :param handler: called with the job ID
        :param threads: number of worker threads, 1 runs on the calling thread
        :param progress: whether to log progress (DEBUG)
        :param max_consecutive_errors: (optional) consecutive failures after which a worker gives up
        """
        if threads <= 1:
            self._work(handler, progress, max_consecutive_errors)
            return

        workers = [threading.Thread(target=self._work, args=(handler, progress and i == 0, max_consecutive_errors),
                                    name=f"{self.label}-{i}")
                   for i in range(threads)]
        for worker in workers:
            worker.start()
        for worker in workers:
            worker.join()

    def _work(self, handler: Callable[[str], None], progress: bool, max_consecutive_errors: int | None):
        total = self.data_source.count_jobs(self.run_id, JobStatus.PENDING) if progress else 0
        last_report = 0.0
        consecutive_errors = 0

        while (job_id := self.data_source.pop_job(self.run_id)) is not None:
            now = time.monotonic()
            if total > 0 and now - last_report > PROGRESS_INTERVAL_SECONDS:
                last_report = now
                pending = self.data_source.count_jobs(self.run_id, JobStatus.PENDING)
                logger.debug(f"{self.label}: ~{100 * (1 - pending / total):.2f}% ({job_id})")

            try:
                handler(job_id)
            except Exception as e:
                consecutive_errors += 1
                logger.debug(f"{self.label}: job {job_id} failed: {e}")
                self.data_source.complete_job(self.run_id, job_id, f"{e.__class__.__name__}: {e}")

                if max_consecutive_errors is not None and consecutive_errors > max_consecutive_errors:
                    logger.error(f"{self.label}: worker stopped after {consecutive_errors} consecutive errors")
                    return
                continue

            consecutive_errors = 0
            self.data_source.complete_job(self.run_id, job_id)

    def count_jobs(self, status: JobStatus | None = None) -> int:
        return self.data_source.count_jobs(self.run_id, status)

    def get_errors(self) -> dict[str, str]:
        return self.data_source.get_errors(self.run_id)

    def delete_jobs(self):
        self.data_source.delete_jobs(self.run_id)
