"""Channel-shortening equalizer/target design and trellis detection.

Submodules
----------
sequences   finite-support sequences, sampled spectra, core operators
spectral    minimum-phase spectral factorization
channel     constellations, ISI channel simulation, RNG streams
designs     closed-form equalizer/target designs
firtarget   optimal FIR targets, effective SNR, error-rate prediction
detect      Viterbi detector (compiled kernel + NumPy fallback) and oracle
analysis    error-rate scoring of arbitrary designs
experiments Monte Carlo harness and reports
cli         command-line interface
"""

from .analysis import RatePoint, score_design, wilson_interval
from .channel import (
    ChannelInstance,
    Constellation,
    RngStream,
    bpsk,
    constellation_by_name,
    distance_cost,
    equalize,
    exp_decay_channel,
    load_channel_spec,
    psk,
    random_symbols,
    ternary,
    transmit,
)
from .designs import (
    DesignResult,
    gpr_monic_target,
    matched_filter_design,
    matched_filter_metric,
    mmse_fixed_target,
    monic_design,
    monic_multiplier,
    posterior_equivalent_family,
    zfe,
)
from .detect import (
    KERNEL_BACKEND,
    DetectionResult,
    Trellis,
    available_backends,
    brute_force_map,
    path_metric,
    viterbi_detect,
)
from .errors import (
    AliasError,
    ConfigError,
    FactorizationError,
    InvalidBeta,
    LengthMismatch,
    ShorteqError,
    SingularSystem,
    SpectralNull,
    TooLarge,
    TruncationError,
)
from .firtarget import (
    DominantError,
    ErrorModel,
    FirProblem,
    FirSolution,
    dominant_error_search,
    effective_snr,
    fir_loss_curve,
    kappa_binary,
    predict_error_rates,
    q_gauss,
    snr_upper_bound,
    solve_fir_target,
)
from .sequences import (
    DEFAULT_GRID,
    Sequence,
    Spectrum,
    add,
    adjoint,
    autocorrelation,
    convolve,
    delta,
    from_spectrum,
    inner,
    subtract,
    to_spectrum,
    truncate_spectrum,
)
from .spectral import FactorResult, min_phase_factor

__version__ = "0.1.0"
