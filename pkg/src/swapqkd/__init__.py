"""Rate and visibility calculator for QKD over concatenated entanglement swapping."""

from .chain import (
    ChainConfig,
    CoincidenceTable,
    TruncationError,
    certify_visibility,
    coincidence_q,
    coincidence_table,
    conditional_outer_counts,
    effective_eta,
    omega,
    visibility,
)
from .detector import (
    ClickPattern,
    DetectorParams,
    EvidenceUnderflowError,
    ImpossiblePatternError,
    PhotonCountPattern,
    bayes_invert,
    p_click,
    p_no_click,
    p_pattern,
)
from .fock import (
    CircuitParams,
    FockState,
    apply_beam_splitter,
    apply_polarization_rotator,
    oracle_single_swap,
    pdc_state,
    project_inner,
    tensor,
    vacuum_state,
)
from .optimize import (
    OptimizationResult,
    OptimizationSpec,
    maximize_key_rate,
    sweep_distance,
    upper_bound_rate,
)
from .rates import (
    KeyRateResult,
    LinkParams,
    binary_entropy,
    channel_efficiency,
    evaluate_key_rate,
    ingaas_dark_count,
    net_key_rate,
    qber,
    shor_preskill_rate,
    sifted_rate,
    tgw_bound,
)

__version__ = "0.1.0"
