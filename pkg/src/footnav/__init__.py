"""Foot-mounted inertial dead reckoning with zero-velocity updates.

A numpy library providing: SO(3)/SE2(3) Lie group operations, a
right-invariant extended Kalman filter and a conventional error-state EKF
over the same 15-dimensional state, raw-signal stance detection, a
synthetic gait simulator that doubles as ground-truth oracle, trajectory
metrics, CSV/config file formats and a process-noise sensitivity sweep.
"""

from .detector import DetectorConfig, StanceDetector, StanceEvent, robot_preset, segment_events
from .ekf import EkfBelief, ekf_predict, ekf_zupt_update, run_ekf, run_ekf_full
from .inekf import (
    DegenerateUpdateWarning,
    FilterNumericError,
    FilterRun,
    NotStaticError,
    ProcessMatrices,
    build_A,
    build_process_matrices,
    init_from_static,
    predict,
    run_filter,
    run_filter_full,
    zupt_update,
)
from .io import (
    ConfigError,
    ImuLogError,
    RunConfig,
    dump_config,
    load_config,
    parse_imu_log,
    parse_trajectory,
    write_imu_log,
    write_trajectory,
)
from .lie import (
    SE23,
    adjoint,
    compose,
    exp_se23,
    exp_so3,
    from_matrix,
    inverse,
    left_jacobian_so3,
    log_so3,
    project_so3,
    skew,
    to_matrix,
    vee,
    wedge_se23,
)
from .metrics import MetricReport, ate_rmse, compute_report, loop_closure, yaw_drift
from .sim import (
    GAIT_PRESETS,
    GaitSpec,
    GroundTruth,
    corrupt,
    dead_reckon,
    generate_gait,
    inverse_imu,
)
from .sweep import SweepRow, SweepSpec, load_sweep_spec, run_sweep, write_sweep_table
from .types import (
    FilterBelief,
    ImuBias,
    ImuSample,
    LogGapWarning,
    NoiseConfig,
    TrajectoryPoint,
    belief_initial,
    default_cov0_diag,
    validate_log,
)

__version__ = "0.1.0"
