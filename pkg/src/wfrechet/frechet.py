"""Global Fréchet regression for quantile-function responses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SingularDesignError, SupportBounds, validate_covariates, validate_quantile_matrix
from .monotone_qp import ActiveSet, project_rows

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class CenteredDesign:
    xbar: np.ndarray
    Xc: np.ndarray
    Sigma: np.ndarray

    @property
    def n(self) -> int:
        return self.Xc.shape[0]

    @property
    def p(self) -> int:
        return self.Xc.shape[1]


@dataclass(frozen=True)
class FrechetFit:
    Qhat: np.ndarray
    active_sets: list
    bounds: SupportBounds
    iterations: np.ndarray


def center_design(X) -> CenteredDesign:
    X = validate_covariates(X)
    xbar = X.mean(axis=0)
    Xc = X - xbar
    Sigma = Xc.T @ Xc / X.shape[0]
    Sigma = 0.5 * (Sigma + Sigma.T)
    return CenteredDesign(xbar, Xc, Sigma)


def _checked_inputs(X, Y):
    design = center_design(X)
    Y = np.asarray(validate_quantile_matrix(Y))
    if Y.shape[0] != design.n:
        raise ValueError(f"X has {design.n} rows but Y has {Y.shape[0]}")
    return design, Y


def _sigma_inverse(Sigma):
    cond = np.linalg.cond(Sigma) if Sigma.size else 1.0
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularDesignError(
            f"covariance of X is singular (condition number {cond:.3g}); "
            "use variable selection (select/path), whose weighted fit is always well-posed"
        )
    return np.linalg.inv(Sigma)


def hat_matrix(design: CenteredDesign) -> np.ndarray:
    """``(1/n) (11' + Xc Sigma^-1 Xc')``; rows sum to one."""
    Sinv = _sigma_inverse(design.Sigma)
    n = design.n
    return (1.0 + design.Xc @ Sinv @ design.Xc.T) / n


def fit_frechet(X, Y, bounds: SupportBounds = SupportBounds()) -> FrechetFit:
    design, Y = _checked_inputs(X, Y)
    Sinv = _sigma_inverse(design.Sigma)
    A = Y.mean(axis=0) + design.Xc @ (Sinv @ (design.Xc.T @ Y)) / design.n
    Q, mask, iters = project_rows(A, bounds)
    return FrechetFit(Q, [ActiveSet.from_mask(w) for w in mask], bounds, iters)


def predict_frechet(X, Y, bounds: SupportBounds, Xnew) -> np.ndarray:
    """Projected weighted averages ``(1/n) sum_i s_i(x) Y_i`` at new covariates,
    with ``s_i(x) = 1 + (x - xbar)' Sigma^-1 (x_i - xbar)``."""
    design, Y = _checked_inputs(X, Y)
    Xnew = np.array(Xnew, dtype=float, ndmin=2)
    if Xnew.shape[1] != design.p:
        raise ValueError(f"Xnew has {Xnew.shape[1]} columns, expected {design.p}")
    Sinv = _sigma_inverse(design.Sigma)
    A = Y.mean(axis=0) + (Xnew - design.xbar) @ (Sinv @ (design.Xc.T @ Y)) / design.n
    return project_rows(A, bounds)[0]
