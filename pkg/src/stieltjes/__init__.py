"""Lebesgue-Stieltjes integration with respect to measure-inducing functions."""

from .domain import (Box, BoxDomain, GridMesh, SubsetIndex, cell_count, cells,
                     enumerate_subsets, refine)
from .errors import (CornerDivergenceError, DimensionError, DomainError, EvaluationError,
                     HypothesisError, InvalidSubsetError, LimitDivergenceError,
                     MarginalDivergenceError, MarginalMeasureError, OrderSensitivityError,
                     SpecError, StieltjesError, TagRequiredError, TransformError)
from .extend import (ConvergenceTable, discretize_semicopula, extended_integral,
                     lipschitz_survival_bound, staircase_cdf)
from .funcspace import (ContinuityTag, DistributionFunction1D, LimitScheme, Polynomial,
                        SemiCopulaFamily, TaggedFunction, check_semicopula, corner_value,
                        grounded_core, groundedness_probe, independence, lower_frechet,
                        lower_marginal, product_minus, survival, upper_frechet,
                        upper_marginal)
from .integrate import (IbpBreakdown, IbpReport, TransformReport, generalized_inverse,
                        ibp_check, pi, psi, transform_check)
from .kernels import BACKEND
from .measures import (AtomicSignedMeasure, Decomposition, GridField, StepFunction,
                       cumulative_field, d_limit, decompose, decompose_marginals, delta,
                       extract_measure, indicator_ge, is_measure_inducing, marginal_measure,
                       measure_from_density, pushforward, sample)
from .variation import VariationReport, hk_variation, variation_profile, vitali_variation

__version__ = "0.1.0"
