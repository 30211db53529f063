"""Toolkit for simulating, designing and fitting MBVD-based acoustic ladder filters."""

from .netcore import (
    FrequencyGrid,
    GridMismatchError,
    SingularNetworkError,
    SMatrix,
    TwoPortABCD,
    abcd_to_s,
    cascade,
    group_delay,
    identity,
    parallel_combine,
    series_element,
    shunt_element,
)
from .resonator import (
    KT2_LIMIT,
    MbvdModel,
    MotionalBranch,
    ResonatorLayout,
    ResonatorSpec,
    admittance,
    derive_mbvd,
    with_spurious,
)
from .ladder import (
    LadderDesign,
    LadderSpec,
    Stage,
    build_network,
    calibrate_stage_patterns,
    design_a,
    design_b,
    preset_design_a,
    preset_design_b,
)
from .metrics import AnalysisError, FilterMetrics, analyze
from .dispersion import DispersionModel, calibrate, fs_from_gap, gap_for_target
from .fitting import (
    ExtractionError,
    FitError,
    FitResult,
    extract_fs_fp,
    extract_kt2,
    extract_q,
    extract_q_width,
    fit_model,
)
from .tsio import TouchstoneDocument, TouchstoneParseError, export_csv, parse, write

__version__ = "0.1.0"
