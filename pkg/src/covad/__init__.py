"""Covariance-based user activity detection for massive MIMO."""
from .estimators import (
    CoordinateOrder,
    EstimatorKind,
    EstimatorState,
    NumericalFault,
    SolverOptions,
    coord_update,
    ml_cost,
    mmv_cost,
    nnls_cost,
    rank1_update_inverse,
    run_coordinate_descent,
)
from .metrics import RocCurve, detection_rates, roc_sweep, threshold_detect
from .model import (
    ActivityPattern,
    ChannelKind,
    ConfigError,
    PilotKind,
    ScenarioConfig,
    draw_scenario,
    generate_activity,
    generate_channels,
    generate_pilots,
    sample_covariance,
    snr_of_user,
    synthesize_observation,
    true_covariance,
)

__version__ = "0.1.0"
