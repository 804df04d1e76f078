"""Cross-validation over a tau grid and stability selection by half-sampling."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import SupportBounds, validate_covariates, validate_quantile_matrix
from .datagen import make_rng
from .friso import DescentConfig, FrisoProblem, ridge_matrix, solution_path
from .monotone_qp import project_rows


@dataclass
class CvReport:
    tau_grid: np.ndarray
    cv_error: np.ndarray
    tau_star: float
    fold_assignments: np.ndarray
    K: int
    seed: int

    def to_dict(self):
        return {
            "tau_grid": self.tau_grid.tolist(),
            "cv_error": self.cv_error.tolist(),
            "tau_star": self.tau_star,
            "fold_assignments": self.fold_assignments.tolist(),
            "K": self.K,
            "seed": self.seed,
        }

    def csv_rows(self):
        yield ("tau", "cv_error")
        for t, e in zip(self.tau_grid, self.cv_error):
            yield (t, e)


@dataclass
class StabilityReport:
    tau_grid: np.ndarray
    proportions: np.ndarray
    max_proportion: np.ndarray
    selected: list
    B: int
    pi_threshold: float
    selection_cutoff: float
    seed: int

    def to_dict(self):
        return {
            "tau_grid": self.tau_grid.tolist(),
            "proportions": self.proportions.tolist(),
            "max_proportion": self.max_proportion.tolist(),
            "selected": list(self.selected),
            "B": self.B,
            "pi_threshold": self.pi_threshold,
            "selection_cutoff": self.selection_cutoff,
            "seed": self.seed,
        }

    def csv_rows(self, names=None):
        p = self.proportions.shape[0]
        names = names or [f"V{j + 1}" for j in range(p)]
        yield ("variable", "tau", "proportion")
        for j in range(p):
            for k, t in enumerate(self.tau_grid):
                yield (names[j], t, self.proportions[j, k])


def _map(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _inputs(X, Y):
    X = validate_covariates(X)
    Y = np.asarray(validate_quantile_matrix(Y))
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
    return X, Y


def fold_ids(n, K, seed) -> np.ndarray:
    """Shuffle 0..n-1 and deal the shuffled subjects round-robin into K folds."""
    if not 2 <= K <= n:
        raise ValueError(f"number of folds must satisfy 2 <= K <= n={n}, got {K}")
    perm = make_rng(seed).permutation(n)
    folds = np.empty(n, dtype=np.int64)
    folds[perm] = np.arange(n) % K
    return folds


def weighted_predict(problem: FrisoProblem, lam, Xnew) -> np.ndarray:
    """Out-of-sample weighted fit at ``Xnew`` for training data held in ``problem``."""
    A = ridge_matrix(problem.design.Sigma, lam)
    fitted = problem.Ybar + (np.atleast_2d(Xnew) - problem.design.xbar) @ (A @ problem.Z) / problem.n
    return project_rows(fitted, problem.bounds)[0]


def kfold_cv(
    X,
    Y,
    tau_grid,
    bounds: SupportBounds = SupportBounds(),
    K: int = 5,
    config: DescentConfig = DescentConfig(),
    seed: int = 0,
    threads: int | None = None,
) -> CvReport:
    X, Y = _inputs(X, Y)
    n = X.shape[0]
    taus = np.asarray(tau_grid, dtype=float)
    folds = fold_ids(n, K, seed)

    def run_fold(f):
        test = folds == f
        prob = FrisoProblem(X[~test], Y[~test], bounds)
        path = solution_path(None, None, taus, config=config, problem=prob)
        errs = np.empty((int(test.sum()), taus.size))
        for k in range(taus.size):
            pred = weighted_predict(prob, path.lambdas[:, k], X[test])
            errs[:, k] = np.mean((pred - Y[test]) ** 2, axis=1)
        return errs

    per_fold = _map(run_fold, range(K), threads)
    subject_err = np.empty((n, taus.size))
    for f, errs in enumerate(per_fold):
        subject_err[folds == f] = errs
    cv_error = subject_err.mean(axis=0)
    return CvReport(taus, cv_error, float(taus[int(np.argmin(cv_error))]), folds, K, seed)


def stability_selection(
    X,
    Y,
    tau_grid,
    bounds: SupportBounds = SupportBounds(),
    B: int = 50,
    pi_threshold: float = 0.9,
    selection_cutoff: float = 0.01,
    config: DescentConfig = DescentConfig(),
    seed: int = 0,
    threads: int | None = None,
) -> StabilityReport:
    """Selection frequencies over ``B`` half-samples.

    Variable j counts as selected at tau in a replicate when its weight
    exceeds ``selection_cutoff * tau / p``; it is kept overall when its
    frequency reaches ``pi_threshold`` at some tau.
    """
    if int(B) != B or B < 1:
        raise ValueError(f"replicate count must be a positive integer, got {B}")
    if not 0.5 < pi_threshold <= 1:
        raise ValueError(f"pi_threshold must lie in (0.5, 1], got {pi_threshold}")
    if not selection_cutoff >= 0:
        raise ValueError("selection_cutoff must be non-negative")
    X, Y = _inputs(X, Y)
    n, p = X.shape
    half = n // 2
    if half < 2:
        raise ValueError("need n >= 4 for half-sampling")
    taus = np.asarray(tau_grid, dtype=float)

    def replicate(b):
        idx = np.sort(make_rng(seed, b).choice(n, size=half, replace=False))
        path = solution_path(X[idx], Y[idx], taus, bounds, config)
        return path.lambdas > selection_cutoff * taus[None, :] / p

    counts = np.zeros((p, taus.size), dtype=np.int64)
    for hits in _map(replicate, range(int(B)), threads):
        counts += hits
    proportions = counts / B
    max_prop = proportions.max(axis=1)
    selected = [int(j) for j in np.flatnonzero(max_prop >= pi_threshold)]
    return StabilityReport(taus, proportions, max_prop, selected, int(B), float(pi_threshold), float(selection_cutoff), seed)
