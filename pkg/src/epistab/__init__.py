"""Epistemic-stability laboratory for linear-Gaussian estimation loops.

Quantifies how structural ill-conditioning of the closed-loop operator
A - K H turns into miscalibration: a composite instability index built
from the stability margin, condition number, integrated sensitivity and
innovation amplification; seeded simulation of normalized-innovation
statistics; calibration metrics; robust statistics; and reproducible
sweep harnesses with CSV artifacts.
"""

from .calibration import (
    BinScheme,
    PredictionRecord,
    binary_record,
    brier,
    ece,
    log_loss,
    mce,
)
from .deltas import analyze_condition_deltas, load_condition_records
from .exceptions import (
    ConvergenceError,
    CsvFormatError,
    DegenerateDataError,
    DimensionError,
    DivergenceError,
    EpistabError,
    InstabilityError,
    SearchError,
    SingularMatrixError,
    ValidationError,
)
from .hrisk import (
    HRiskConfig,
    HRiskFactors,
    calibrate_constants,
    critique_gain_search,
    hrisk_factors,
    hrisk_index,
)
from .lti import (
    ClosedLoopAnalysis,
    DarePerConfig,
    FilterSpec,
    FixedGain,
    GainRay,
    LtiSystem,
    analyze_closed_loop,
    believed_innovation_covariance,
    closed_loop,
    dare_gain,
    resolve_gain,
)
from .matrices import (
    condition_number,
    kronecker,
    operator_two_norm,
    solve_discrete_lyapunov,
    solve_linear,
    spectral_radius,
)
from .simulate import (
    NisSeries,
    RunConfig,
    Trajectory,
    apply_gate,
    chi2_quantile,
    gaussian_stream,
    nis_stats,
    simulate_run,
)
from .stats import (
    IntervalEstimate,
    PairedSample,
    bca_ci,
    bh_fdr,
    cliffs_delta,
    hedges_g,
    ols_fit,
    pearson,
    spearman,
    theil_sen,
    theil_sen_intercept,
)
from .sweeps import (
    HarnessConfig,
    SweepResult,
    SweepRow,
    SweepSpec,
    b1_system,
    b2_system,
    build_spec,
    find_alpha_crit,
    resolve_config,
    run_ablation,
    run_sweep,
)

__version__ = "0.1.0"
