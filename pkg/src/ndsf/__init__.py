"""Non-equilibrium dynamical structure factors of the transverse-field
Ising chain via Heisenberg-picture operator evolution."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    NumericError,
    SizeError,
    TruncationOverflowError,
)
from .evolution import (
    CorrelationSet,
    EvolutionConfig,
    correlation_series,
    entanglement_profile,
    evolve_operator,
)
from .model import (
    GateSchedule,
    ModelParams,
    OperatorMps,
    ProductState,
    dense_hamiltonian,
    local_operator_mps,
    product_state,
    trotter_gates,
)
from .reference import (
    BoundStateSet,
    ContinuumBand,
    DispersionCurve,
    EdSolution,
    bound_state_spectrum,
    continuum_bounds,
    ed_correlation,
    ed_solve,
    lehmann_spectrum,
    qcp_bounds,
    rydberg_identity_residual,
    spinon_dispersion,
)
from .spectral import (
    LpSpec,
    SpectralGrid,
    TimeSeries,
    WindowSpec,
    burg_coefficients,
    burg_extend,
    extract_peaks,
    ndsf_pipeline,
    parzen_kernel,
    parzen_weight,
    resolution_sigma,
)
from .tensor import SvdResult, TruncationSpec, contract, truncated_svd
