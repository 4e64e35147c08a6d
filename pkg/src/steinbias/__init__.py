"""Biased distributional transformations and their Stein characterizations."""
from . import biastransform, distributions, errors, orthopoly, steincheck, sumconstruct
from .biastransform import (
    BiasingFunction,
    DiscretePmf,
    TransformResult,
    classic_bias,
    closed_form_transform,
    density_order_one,
    discrete_transform_pmf,
    make_biasing_function,
    prepare_transform,
    sample_transformed,
)
from .distributions import (
    DistributionSpec,
    Family,
    RandomStream,
    SampleBatch,
    analytic_moment,
    evaluate,
    make_distribution,
    sample,
)
from .orthopoly import (
    AlphaValue,
    MonicPoly,
    PolyFamily,
    PolySystemId,
    alpha_closed_form,
    orthopoly_from_moments,
    poly_coeffs,
    system,
)
from .steincheck import (
    MCEstimate,
    TestFunction,
    VerificationReport,
    fixed_point_test,
    gamma_sizebias_equivalence,
    mc_expectation,
    stein_residual,
    verify_characterization,
)
from .sumconstruct import (
    IndexDistribution,
    MultiIndex,
    SummandSet,
    enumerate_multi_indices,
    index_distribution,
    iterated_bias_check,
    sample_sum_transformed,
    verify_alpha_identity,
)

__version__ = "0.1.0"
