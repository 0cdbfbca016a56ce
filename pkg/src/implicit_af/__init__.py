"""Implicit Active Flux schemes for linear advection."""

from .core import (
    Constant,
    Gaussian,
    Grid1D,
    JiangShuComposite,
    Sine,
    StateAF,
    Zero,
    error_norms,
    exact_advection,
    init_state,
)
from .errors import (
    ActiveFluxError,
    ConfigurationError,
    NumericalError,
    SingularCflError,
    SingularCouplingError,
    SingularSymbolError,
    UnsupportedBoundaryError,
)
from .schemes import (
    SchemeWeights,
    StencilMask,
    all_masks,
    build_weights,
    enumerate_masks,
    match_reference,
    named_masks,
    resolve_scheme,
    scheme_name,
)
from .solver import (
    AdvectionProblem,
    Dirichlet,
    ImplicitSystem,
    Periodic,
    RunResult,
    SineSignal,
    assemble,
    run,
    step_dirichlet,
    step_periodic,
)
from .stability import (
    DiffusionDispersionCurve,
    FourierSymbol,
    StabilityReport,
    amplification_eigs,
    classify,
    curves,
    fourier_symbol,
    l_stability_probe,
    matrix_stability,
    scan_cmin,
    schur_unit_disk,
)

__version__ = "0.1.0"
