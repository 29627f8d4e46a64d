"""Isotropy-preserving sparse regularization of band-limited fields on the sphere."""

__version__ = "0.1.0"

from .coeffs import (
    CoefficientSet,
    DegreeWeights,
    degree_norms,
    discrepancy,
    flat_index,
    hybrid_norm,
    l1_norm,
    l1_soft_threshold,
    unflatten,
)
from .errors import (
    DimensionError,
    DomainError,
    FormatError,
    IsoregError,
    NumericError,
    UndefinedScalingError,
)
from .frontier import (
    Frontier,
    InactiveConstraint,
    build_frontier,
    l0_frontier,
    lambda_from_kappa,
    lambda_from_sigma,
)
from .regularizer import RegularizationResult, lambda_bound_for_error, objective, regularize
from .scaling import ScalingReport, optimal_scaling, scaled_field, scaling_factor, scaling_report
from .sht import (
    GridField,
    QuadratureGrid,
    Rotation,
    analyze,
    evaluate,
    field_errors,
    rotate_field,
    spherical_harmonic,
    synthesize,
)
from .simulate import (
    EnsembleSpec,
    PowerSpectrum,
    cmb_like_spectrum,
    estimate_spectrum,
    isotropy_test,
    sample_isotropic,
    scaled_spectrum,
)
