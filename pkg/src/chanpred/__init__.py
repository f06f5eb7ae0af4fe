"""Reconstruct dense path-loss and shadow-fading series from sparse channel samples."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ChanpredError,
    DataFormatError,
    DegenerateRangeError,
    InvalidInputError,
    ModelStateError,
    NumericError,
    SingularFitError,
    TrainingDivergedError,
)
from .evaluation import compare_runs, empirical_density, fit_zero_mean_gaussian, rmse  # noqa: E402
from .harness import PredictionRun, SplitSpec, SweepGrid, run_prediction, split_equally_spaced, sweep  # noqa: E402
from .networks import (  # noqa: E402
    NetworkConfig,
    NetworkKind,
    NetworkModel,
    Normalizer,
    TrainingSet,
    forward,
    kmeans,
    predict,
    train,
    train_bpn,
    train_elm,
    train_rbf,
)
from .pipeline import (  # noqa: E402
    ChannelTrace,
    LinkBudget,
    LogDistanceModel,
    LsfSeries,
    TransferFunctionRecord,
    extract_lsf,
    fit_log_distance,
    raw_path_loss,
    received_power,
    sliding_window_average,
)
from .synthetic import SyntheticParams, generate_trace, generate_transfer_functions  # noqa: E402
