"""Generalised Hausdorff operators and their truncated-Fourier approximants.

The main entry points are re-exported here; see the submodules for the rest.
"""

from .bounds import (
    BoundReport,
    lemma1_pointwise_rhs,
    lemma2_pointwise_rhs,
    tail_set_lower_limit,
    theorem1_rhs,
    theorem2_rhs,
)
from .core import (
    DEFAULT_QUAD,
    GridSpec,
    KernelSpec,
    QuadratureConfig,
    ScalingSpec,
    TestFunction,
    lp_norm,
)
from .errors import ConfigError, HausdorffError, NumericalFailure
from .experiments import (
    RateReport,
    approximate_identity_study,
    bellman_divergence_demo,
    convergence_study,
    fejer_convolution,
    fit_rate,
    recovery_study,
)
from .fourier import (
    adjoint_variant_approximant,
    dirichlet_integral,
    fourier_transform,
    function_recovery,
    sinc_integral,
    truncated_approximant,
    truncated_approximant_direct,
)
from .moduli import dini_integral, modulus_analytic, modulus_estimate
from .operators import (
    HausdorffOperatorSpec,
    adjoint_apply,
    bellman,
    cesaro,
    duality_gap,
    hausdorff_apply,
    riemann_liouville,
)

__version__ = "0.1.0"
