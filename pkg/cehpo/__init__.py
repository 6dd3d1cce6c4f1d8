from .baselines.comparison import Comparison, compare_methods
from .baselines.search import BaselineConfig, SearchResult, grid_search, random_search
from .engine.ce import build_elite, compute_gamma, estimate_q, next_round_samples, run_cehpo, should_stop, smooth_q
from .engine.diagnostics import result_violations, round_violations
from .engine.evaluation import Evaluator
from .errors import CehpoError, ConfigError, EvaluationError, RunError, ShapeMismatchError
from .hyperspace.spaces import DecreasingSequenceSpace, Scalar, ScalarIntervalSpace, Sequence, distance_sq, \
    sample_uniform, validate
from .models.config import CeConfig, Direction
from .models.samples import CeResult, RoundRecord, Sample, StopReason
from .multitask.grid import GridResult, TaskGrid, run_grid, select_consensus
from .objectives.analytic import analytic_objective
from .objectives.objective import FunctionObjective, Objective
from .objectives.optimizers import AdamParams, OptimizerState, Variant, adam_step, amsgrad_step
from .objectives.problems import LogisticBlobs, NoisyQuadratic
from .objectives.training import TrainOutcome, train_until
from .objectives.tuning import TunedField, make_convergence_objective, make_generalization_objective
