import logging
import math

from cehpo.errors import EvaluationError
from cehpo.hyperspace.spaces import HyperValue
from cehpo.jobs.jobs import JobHandler
from cehpo.jobs.memory import MemoryJobsDataSource
from cehpo.objectives.objective import Objective

logger = logging.getLogger(__name__)


class Evaluation:
    """
    Outcome of scoring a batch of values. Failed evaluations carry the worst-score sentinel and their error message.
    """

    def __init__(self, scores: list[float], errors: dict[int, str]):
        self.scores = scores
        self.errors = errors

    @property
    def all_failed(self) -> bool:
        return len(self.errors) == len(self.scores)


class Evaluator:
    """
    Scores batches of hyperparameter values, optionally on several threads. Scores are merged by index, so the
    result never depends on the order in which the evaluations finish.

    :param threads: number of worker threads, 1 evaluates on the calling thread
    """

    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValueError(f"threads must be a positive integer, got {threads}")
        self.threads = threads

    def evaluate(self, objective: Objective, values: list[HyperValue], eval_seeds: list[int],
                 label: str = "batch") -> Evaluation:
        """
        Scores values[i] with eval_seeds[i] for every i.
        :param objective: the objective
        :param values: the values to score
        :param eval_seeds: one seed per value
        :param label: used in log messages about failures
        :return: the evaluation
        """
        if len(values) != len(eval_seeds):
            raise ValueError(f"Got {len(values)} values but {len(eval_seeds)} seeds")

        sentinel = objective.direction.worst_score
        scores = [sentinel] * len(values)

        def handle(job_id: str):
            i = int(job_id)
            score = float(objective.evaluate(values[i], eval_seeds[i]))
            if math.isnan(score):
                raise EvaluationError("objective returned NaN")
            scores[i] = score

        job_handler = JobHandler("evaluation", MemoryJobsDataSource())
        job_handler.create_jobs([str(i) for i in range(len(values))])
        job_handler.iterate_jobs(handle, threads=min(self.threads, max(len(values), 1)))

        errors = {int(job_id): error for job_id, error in job_handler.get_errors().items()}
        for i in sorted(errors):
            scores[i] = sentinel
            logger.warning(f"{label}: evaluation of sample {i} ({values[i].to_str()}) failed: {errors[i]}")

        return Evaluation(scores, errors)
