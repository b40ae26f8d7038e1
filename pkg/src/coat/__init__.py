"""Composition-adjusted thresholding (COAT) for sparse basis covariance estimation."""

from .compositional import (
    CompositionMatrix,
    CovMatrix,
    Rank2Component,
    basis_to_clr_population,
    clr,
    clr_cov_direct,
    clr_cov_via_variation,
    closure,
    nonidentifiable_pair,
    rank2_project,
    variation_matrix,
    variation_matrix_population,
)
from .errors import (
    CoatError,
    ConfigurationError,
    DataError,
    DomainError,
    ParameterError,
    ParseError,
)
from .estimator import (
    CoatEstimate,
    ThetaMatrix,
    ThresholdRule,
    apply_threshold,
    coat,
    estimate_theta,
    min_eigenvalue,
    threshold,
)
from .selection import CvResult, cross_validate, select_lambda_pd
from .stability import StabilityNetwork, bootstrap_stability, edge_sign_split, export_network

__version__ = "0.1.0"
