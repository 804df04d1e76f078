"""Fréchet regression and variable selection for quantile-function responses
in 2-Wasserstein space."""

from .core import (
    ProbabilityGrid,
    QuantileMatrix,
    SimplexWeights,
    SingularDesignError,
    SolverError,
    SupportBounds,
    ValidationError,
    make_grid,
    validate_quantile_matrix,
    wasserstein2_sq,
)
from .datagen import ZinbLinks, ZinbParams, generate_zinbinom_qf, zinb_quantile
from .frechet import CenteredDesign, FrechetFit, center_design, fit_frechet, predict_frechet
from .friso import (
    DescentConfig,
    FrisoResult,
    SpherePoint,
    friso_gradient,
    friso_objective,
    geodesic_step,
    ridge_matrix,
    solution_path,
    solve_friso,
    weighted_hat,
)
from .monotone_qp import ActiveSet, ProjectionResult, pava_clip_oracle, project_monotone
from .resampling import CvReport, StabilityReport, kfold_cv, stability_selection

__version__ = "0.1.0"
