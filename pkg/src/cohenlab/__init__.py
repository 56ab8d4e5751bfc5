"""Numerical laboratory for Cohen's spectral-radius inequality and its analogues
for operator norms and numerical radii on finite weighted L^p spaces."""

__version__ = "0.1.0"

from .errors import InputError, PreconditionError, UnsupportedExponentError
from .measure import (
    Exponent,
    MeasurableFunction,
    MeasureSpace,
    holder_check,
    inner_product,
    pnorm,
    pointwise_product,
)
from .operators import (
    MatrixOperator,
    MultiplicationOperator,
    adjoint,
    apply,
    compose,
    is_positive_operator,
    product_of_symbols,
    similarity_to_unweighted,
)
from .spectral import (
    ConvergenceReport,
    operator_norm,
    operator_norm_estimate,
    perron_radius,
    spectral_radius,
)
from .numrad import (
    RadiusResult,
    hermitian_part,
    lambda_max_hermitian,
    numerical_radius,
    numerical_radius_positive_cone,
    numerical_radius_sampled,
)
from .inequalities import (
    InequalityReport,
    check_cohen_spectral,
    check_cohen_spectral_multi,
    check_mixed_numrad,
    check_norm_corollary,
    check_norm_multi,
    check_numrad_corollary,
    check_numrad_multi,
    rank_one_cohen,
    replicate_example1,
    replicate_example2,
    replicate_rank_one,
)
