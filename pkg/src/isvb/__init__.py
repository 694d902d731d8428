"""Debiased spike-and-slab variational Bayes for inference on a
low-dimensional coordinate subset of a sparse high-dimensional linear
regression, with mean-field, oracle and debiased-LASSO baselines and a
Monte Carlo coverage harness."""

from .baselines import MFModel, draw_mf, full_mf, heuristic_variances, oracle, zz_debiased
from .cavi import (
    CaviConfig,
    CaviResult,
    SpikeSlabPrior,
    VariationalParams,
    elbo,
    fit_cavi,
    mf_mean,
    sample_mf,
    update_coordinate,
)
from .data import (
    CovarianceSpec,
    Dataset,
    Scenario,
    ValueSpec,
    build_covariance,
    generate_dataset,
    load_csv,
    load_scenario,
    scenario_from_json,
)
from .lasso import LassoFit, cv_lasso, default_lambda_grid, estimate_noise, lasso_path
from .linalg import mvn_sample, orthonormal_complement, spd_inverse
from .model import ISVBConfig, ISVBModel, draw, fit, model_from_json, model_to_json, summary
from .preprocess import PreprocessedData, debias_map_apply, preprocess, rescale_by_noise
from .regions import (
    CredibleEllipsoid,
    CredibleInterval,
    chi2_cdf,
    chi2_quantile,
    contains,
    ellipsoid_from_samples,
    interval_from_samples,
    volume_proxy,
)
from .rng import rng_stream
from .simulate import MetricsRow, RunConfig, design_diagnostics, run_scenario, write_metrics_csv
from .target import GPrior, LaplaceTarget, NormalTarget, build_target_posterior, sample_target

__version__ = "0.1.0"
