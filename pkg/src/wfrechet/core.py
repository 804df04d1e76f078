"""Shared types, the probability grid and the discretized 2-Wasserstein metric."""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

MONOTONE_TOL = 1e-12


class ValidationError(ValueError):
    """Input data violates a structural requirement.

    ``violations`` lists every offending ``(row, index)`` pair.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class SingularDesignError(np.linalg.LinAlgError):
    pass


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProbabilityGrid:
    levels: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim != 1 or levels.size == 0:
            raise ValueError("grid levels must be a non-empty vector")
        if not (levels[0] > 0.0 and levels[-1] < 1.0):
            raise ValueError("grid levels must lie strictly inside (0, 1)")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("grid levels must be strictly increasing")
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    @property
    def m(self) -> int:
        return self.levels.size

    def __len__(self):
        return self.m

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.levels, dtype=dtype)


@dataclass(frozen=True)
class SupportBounds:
    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("bounds must not be NaN")
        if lo == math.inf or hi == -math.inf:
            raise ValueError("lower bound cannot be +inf, upper bound cannot be -inf")
        if not lo < hi:
            raise ValueError(f"lower bound {lo} must be strictly below upper bound {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def has_lower(self) -> bool:
        return math.isfinite(self.lower)

    @property
    def has_upper(self) -> bool:
        return math.isfinite(self.upper)


@dataclass(frozen=True)
class QuantileMatrix:
    """Quantile functions on a shared grid, one subject per row."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class SimplexWeights:
    tau: float
    lam: np.ndarray = field(repr=False)

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float).copy()
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if np.any(lam < 0):
            raise ValueError("simplex weights must be non-negative")
        if abs(lam.sum() - self.tau) > 1e-10 * self.tau:
            raise ValueError(f"weights sum to {lam.sum()}, expected {self.tau}")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_sphere(cls, w, tau, clamp=0.0):
        """Map a unit vector to the tau-simplex via ``tau * w**2``.

        Components below ``clamp * tau`` are set to zero and the remainder is
        rescaled to sum to ``tau``.
        """
        lam = tau * np.asarray(w, dtype=float) ** 2
        if clamp > 0:
            lam[lam < clamp * tau] = 0.0
        lam *= tau / lam.sum()
        return cls(float(tau), lam)


def make_grid(m: int) -> ProbabilityGrid:
    """Midpoint grid ``(2k + 1) / (2m)`` for ``k = 0..m-1``."""
    if int(m) != m or m < 1:
        raise ValueError(f"grid size must be a positive integer, got {m}")
    m = int(m)
    return ProbabilityGrid((2.0 * np.arange(m) + 1.0) / (2.0 * m))


def wasserstein2_sq(q1, q2, grid: ProbabilityGrid | None = None) -> float:
    """Squared 2-Wasserstein distance between two quantile rows.

    Each grid point carries weight ``1/m``.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q1.shape != q2.shape or q1.ndim != 1:
        raise ValueError(f"quantile rows differ in shape: {q1.shape} vs {q2.shape}")
    if grid is not None and grid.m != q1.size:
        raise ValueError(f"rows have length {q1.size} but the grid has {grid.m} levels")
    d = q1 - q2
    return float(np.dot(d, d) / q1.size)


def validate_quantile_matrix(Y) -> QuantileMatrix:
    Y = np.array(Y, dtype=float, ndmin=2)
    if Y.ndim != 2:
        raise ValidationError(f"expected a 2-d matrix, got {Y.ndim} dimensions")
    violations = []
    bad = ~np.isfinite(Y)
    for i, k in zip(*np.nonzero(bad)):
        violations.append((int(i), int(k)))
    with np.errstate(invalid="ignore"):
        dec = np.diff(Y, axis=1) < -MONOTONE_TOL
    for i, k in zip(*np.nonzero(dec)):
        violations.append((int(i), int(k) + 1))
    if violations:
        violations = sorted(set(violations))
        shown = ", ".join(f"(row {i}, index {k})" for i, k in violations[:10])
        more = f" and {len(violations) - 10} more" if len(violations) > 10 else ""
        raise ValidationError(
            f"quantile matrix has {len(violations)} non-finite or decreasing entries: {shown}{more}",
            violations,
        )
    Y.setflags(write=False)
    return QuantileMatrix(Y)


def validate_covariates(X) -> np.ndarray:
    X = np.array(X, dtype=float, ndmin=2)
    if X.ndim != 2:
        raise ValueError("covariates must be a 2-d matrix")
    n, p = X.shape
    if n < 2 or p < 1:
        raise ValueError(f"covariate matrix must have n >= 2 and p >= 1, got {n}x{p}")
    if not np.all(np.isfinite(X)):
        raise ValueError("covariate matrix has non-finite entries")
    return X
