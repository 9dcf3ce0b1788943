"""Entanglement sudden death of isotropic qudit pairs under local dephasing."""

__version__ = "0.1.0"

from .densmat import (
    DensityMatrix,
    DensityMatrixError,
    KrausError,
    KrausSet,
    MaxEntangled,
    Tolerances,
    apply_channel,
    fidelity_with_projector,
    max_entangled,
    min_eigenvalue,
    partial_transpose,
    validate_density,
)
from .dephasing import (
    DephasingFactors,
    NoiseModel,
    NoiseParams,
    NoiseScenario,
    apply_full_dephasing,
    decay_factors,
    evolve,
    evolved_closed_form,
    kraus_full,
    kraus_simple,
)
from .esd import (
    EsdResult,
    EsdStatus,
    FidelityBreakdown,
    esd_threshold,
    esd_time_analytic,
    esd_time_numeric,
    fidelity_full,
    fidelity_simple,
    gap,
)
from .isotropic import (
    EofTerms,
    IsotropicState,
    UnsupportedDimensionError,
    critical_fidelity,
    eof_isotropic,
    is_separable,
    isotropic_fidelity,
    make_isotropic,
)
