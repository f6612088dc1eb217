"""Sequential actuator placement and force optimization for shape control.

Pick a budgeted subset of candidate actuators and box-bounded forces so the
worst absolute deviation of a compliant structure is as small as possible.
The package couples an exact minimax LP (self-contained simplex) with
greedy/exhaustive subset search, an MDP formulation whose states are
projection residuals, and two trainable policies: a dueling double deep
Q-network and a reward-estimation regressor, both plain numpy.
"""

from . import backend
from .env import (
    EpisodeConfig,
    PlacementEnv,
    StateMatrix,
    Transition,
    encode_state,
    project_residuals,
)
from .errors import (
    ActuplaceError,
    ConfigError,
    DatasetFormatError,
    DegenerateInputError,
    DuplicateSelectionError,
    EpisodeFinishedError,
    InfeasibleForceError,
    InvalidActionError,
    InvalidBudgetError,
    InvalidPositionError,
    NoActionAvailableError,
    NumericalFailureError,
    TooLargeError,
    TrainingDivergedError,
)
from .generate import (
    GenSpec,
    generate_dataset,
    generate_instance,
    load_dataset,
    save_dataset,
)
from .lp import (
    LPResult,
    SolveStatus,
    SubproblemSolution,
    simplex_solve,
    solve_minimax_gap,
)
from .model import ForceVector, Instance, compute_gap, max_gap, rms_gap
from .nets import (
    Optimizer,
    QNetworkParams,
    RewardNetParams,
    build_input,
    init_q_params,
    init_reward_params,
    load_checkpoint,
    q_backward,
    q_forward,
    reward_backward,
    reward_forward,
    save_checkpoint,
)
from .selection import (
    SelectionState,
    exhaustive_select,
    greedy_select,
    marginal_gain,
)
from .training import (
    EvalReport,
    EvalRow,
    ReplayBuffer,
    TrainConfig,
    double_q_target,
    evaluate_policy,
    rees_select_action,
    select_action,
    train_d3qn,
    train_rees,
)

__version__ = "0.1.0"

__all__ = [
    "ActuplaceError",
    "ConfigError",
    "DatasetFormatError",
    "DegenerateInputError",
    "DuplicateSelectionError",
    "EpisodeConfig",
    "EpisodeFinishedError",
    "EvalReport",
    "EvalRow",
    "ForceVector",
    "GenSpec",
    "InfeasibleForceError",
    "Instance",
    "InvalidActionError",
    "InvalidBudgetError",
    "InvalidPositionError",
    "LPResult",
    "NoActionAvailableError",
    "NumericalFailureError",
    "Optimizer",
    "PlacementEnv",
    "QNetworkParams",
    "ReplayBuffer",
    "RewardNetParams",
    "SelectionState",
    "SolveStatus",
    "StateMatrix",
    "SubproblemSolution",
    "TooLargeError",
    "TrainConfig",
    "TrainingDivergedError",
    "Transition",
    "backend",
    "build_input",
    "compute_gap",
    "double_q_target",
    "encode_state",
    "evaluate_policy",
    "exhaustive_select",
    "generate_dataset",
    "generate_instance",
    "greedy_select",
    "init_q_params",
    "init_reward_params",
    "load_checkpoint",
    "load_dataset",
    "marginal_gain",
    "max_gap",
    "project_residuals",
    "q_backward",
    "q_forward",
    "rees_select_action",
    "reward_backward",
    "reward_forward",
    "rms_gap",
    "save_checkpoint",
    "save_dataset",
    "select_action",
    "simplex_solve",
    "solve_minimax_gap",
    "train_d3qn",
    "train_rees",
]
