"""Finite-SNR rate analysis for cache-aided multi-antenna downlinks.

Schemes: a max-min fair multicast baseline and a multi-antenna coded
delivery schedule with complex-field or finite-field chunk combining,
plus per-subset power optimization, ergodic-rate estimators, high-SNR
slope (DoF) formulas, and a cache-aided interference-channel extension.
"""

from .beamforming import MaxminConfig, MulticastBeam, maxmin_multicast, zf_vector
from .channel import (
    Channel,
    channel_from_text,
    channel_to_text,
    rng_for,
    sample_matrix,
    sample_rayleigh,
)
from .combinatorics import (
    BASELINE,
    MACC,
    CacheContents,
    CodedMessage,
    DecodeReport,
    IndexLedger,
    SystemParams,
    enumerate_subsets,
    place_caches,
    subsets_within,
    verify_decode,
)
from .dof import DofReport, dof_analytic, dof_empirical
from .ergodic import (
    CovarianceResult,
    ErgodicConfig,
    EstimateResult,
    ergodic_baseline,
    ergodic_macc_ff,
    optimize_covariance,
)
from .errors import (
    ChannelParseError,
    DegenerateChannelError,
    InvariantViolationError,
    NumericalWarning,
    ScheduleError,
)
from .interference import IcParams, IcPlacement, ic_placement, ic_rate, sample_ic_rayleigh
from .linalg import (
    hermitian_eig,
    project_psd,
    project_psd_trace_one,
    project_simplex,
    unit_null_vector,
)
from .rates import (
    MACC_CF,
    MACC_FF,
    MMFM,
    SCHEMES,
    PowerAllocation,
    PowerConfig,
    RateQuery,
    RateResult,
    SubsetRate,
    compute_rate,
    mac_equal_rate,
    macc_gain_table,
    macc_rate,
    macc_rate_from_table,
    mmfm_gain_table,
    mmfm_rate,
    mmfm_rate_from_table,
    optimize_power,
    power_audit,
)
from .sweeps import (
    SCHEME_IDS,
    SweepConfig,
    parse_config,
    parse_scheme,
    run_dof,
    run_ergodic_sweep,
    run_ic_sweep,
    run_rate_sweep,
    run_verify,
    write_csv,
)
from .plotting import read_sweep_csv, render_plot

__version__ = "0.1.0"

__all__ = [
    "BASELINE",
    "CacheContents",
    "Channel",
    "ChannelParseError",
    "CodedMessage",
    "CovarianceResult",
    "DecodeReport",
    "DegenerateChannelError",
    "DofReport",
    "ErgodicConfig",
    "EstimateResult",
    "IcParams",
    "IcPlacement",
    "IndexLedger",
    "InvariantViolationError",
    "MACC",
    "MACC_CF",
    "MACC_FF",
    "MMFM",
    "MaxminConfig",
    "MulticastBeam",
    "NumericalWarning",
    "PowerAllocation",
    "PowerConfig",
    "RateQuery",
    "RateResult",
    "SCHEMES",
    "SCHEME_IDS",
    "ScheduleError",
    "SubsetRate",
    "SweepConfig",
    "SystemParams",
    "channel_from_text",
    "channel_to_text",
    "compute_rate",
    "dof_analytic",
    "dof_empirical",
    "enumerate_subsets",
    "ergodic_baseline",
    "ergodic_macc_ff",
    "hermitian_eig",
    "ic_placement",
    "ic_rate",
    "mac_equal_rate",
    "macc_gain_table",
    "macc_rate",
    "macc_rate_from_table",
    "maxmin_multicast",
    "mmfm_gain_table",
    "mmfm_rate",
    "mmfm_rate_from_table",
    "optimize_covariance",
    "optimize_power",
    "parse_config",
    "parse_scheme",
    "place_caches",
    "power_audit",
    "project_psd",
    "project_psd_trace_one",
    "project_simplex",
    "read_sweep_csv",
    "render_plot",
    "rng_for",
    "run_dof",
    "run_ergodic_sweep",
    "run_ic_sweep",
    "run_rate_sweep",
    "run_verify",
    "sample_ic_rayleigh",
    "sample_matrix",
    "sample_rayleigh",
    "subsets_within",
    "unit_null_vector",
    "verify_decode",
    "write_csv",
    "zf_vector",
]
