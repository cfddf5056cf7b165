"""Embedded model-error calibration with polynomial chaos."""
from .pc import (
    GermKind, PcBasis, PcExpansion, QuadratureRule, basis_norms, eval_basis,
    gauss_quadrature, gen_multi_index, pce_cov, pce_eval, pce_moments, sobol_main_index,
)
from .embed import (
    AugmentedParams, EmbeddingSpec, SupportViolation, Variant, input_pce, param_count,
    sample_lambda,
)
from .nisp import ForwardModel, FunctionModel, OutputPce, nisp_project, predictive_moments
from .likelihood import (
    Dataset, LikelihoodKind, LikelihoodSpec, loglik_abc, loglik_classical, loglik_ic_kde,
    loglik_independent_normal, loglik_mvn,
)
from .prior import PriorSpec, log_prior
from .mcmc import AmcmcConfig, Chain, amcmc_run, map_estimate
from .surrogate import SurrogateModel, build_surrogate, surrogate_eval
from .inference import LogPosterior, NispConfig
from .predict import (
    PredictionMoments, map_pushed_forward, posterior_predictive, pushed_forward,
)
from .demos import generate_data, get_demo
from .dataio import load_csv_dataset

__version__ = "0.1.0"
