"""catforge: photon-subtracted cat-state simulation and estimation toolkit."""

from .errors import (
    CatforgeError,
    ConfigError,
    CutoffTooSmallError,
    InvalidArgumentError,
    ZeroStateError,
)
from .fock import (
    DensityMatrix,
    OperatorMatrix,
    PureState,
    SqueezeParam,
    apply_loss,
    cat_state,
    coherent_state,
    fock_state,
    from_document,
    ladder,
    load_state,
    partial_trace,
    save_state,
    squeeze_operator,
    squeezed_vacuum,
    squeezing_db,
    tensor,
    to_document,
    vacuum,
)
from .modes import ModeParams, ModeTaps, discretize_mode, mode_functions, overlap, wavepacket
from .generate import (
    GenerationResult,
    SchemeParams,
    SubtractionResult,
    ancilla_subtract_exact,
    approx_phi,
    coherent_ancilla_subtract,
    lossy_state,
    mixture_weight_c0,
    reduce_to_main,
    two_photon_subtract_single,
)
from .analysis import (
    CatFit,
    WignerGrid,
    best_cat_fit,
    fidelity,
    fidelity_mixed,
    mean_photon,
    min_wigner,
    photon_distribution,
    purity,
    wigner,
)
from .tomography import (
    MleConfig,
    MleDiagnostics,
    QuadratureRecord,
    loglikelihood,
    mle_reconstruct,
    quadrature_pdf,
    sample_quadratures,
)

__version__ = "0.1.0"
