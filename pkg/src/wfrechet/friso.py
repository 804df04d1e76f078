"""Variable selection for Fréchet regression over the tau-simplex.

The weights live on the simplex ``lambda = tau * w**2`` with ``w`` on the unit
sphere, and the fit discrepancy is minimized by geodesic descent on the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Callable

import numpy as np

from .core import SimplexWeights, SupportBounds, validate_quantile_matrix
from .frechet import CenteredDesign, center_design
from .monotone_qp import ActiveSet, block_average, project_rows

CLAMP = 1e-10
PROBE = 1e-5
# re-entry test for coordinates stuck at the sphere's w_j = 0 stationary set
REENTRY_WEIGHT = 1e-4
REENTRY_GAP = 1e-9
MAX_RESEEDS_PER_COORD = 3


@dataclass(frozen=True)
class SpherePoint:
    w: np.ndarray
    tau: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        nrm = np.linalg.norm(w)
        if nrm == 0 or not np.isfinite(nrm):
            raise ValueError("sphere point must be a finite non-zero vector")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        object.__setattr__(self, "w", w / nrm)

    @property
    def lam(self) -> np.ndarray:
        return self.tau * self.w**2

    @classmethod
    def uniform(cls, p, tau):
        return cls(np.full(p, 1.0 / math.sqrt(p)), tau)


@dataclass(frozen=True)
class DescentConfig:
    epsilon: float = 1e-6
    impulse: float = 0.0
    max_iter: int = 500
    step_shrink: float = 0.5
    max_backtracks: int = 30

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 <= self.impulse < 1:
            raise ValueError("impulse must lie in [0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be non-negative")


@dataclass
class FrisoResult:
    lam: SimplexWeights
    objective: float
    iterations: int
    converged: bool
    active_sets: list
    gradient_norm: float
    point: SpherePoint
    history: list = field(default_factory=list)
    qp_iterations: int = 0
    mask: np.ndarray | None = field(default=None, repr=False)


@dataclass
class PathResult:
    tau_grid: np.ndarray
    lambdas: np.ndarray
    results: list

    @property
    def objectives(self):
        return np.array([r.objective for r in self.results])

    @property
    def qp_iterations(self):
        return int(sum(r.qp_iterations for r in self.results))


def ridge_matrix(Sigma, lam) -> np.ndarray:
    """``L (L Sigma L + I)^-1 L`` with ``L = diag(sqrt(lam))``.

    Equals ``(Sigma + diag(lam)^-1)^-1`` when every weight is positive and has
    zero rows/columns where a weight is zero.
    """
    lam = np.asarray(getattr(lam, "lam", lam), dtype=float)
    return _ridge_parts(np.asarray(Sigma, dtype=float), np.sqrt(lam))


def _ridge_parts(Sigma, d):
    p = d.size
    inner = d[:, None] * Sigma * d[None, :] + np.eye(p)
    K = np.linalg.inv(inner)
    A = d[:, None] * K * d[None, :]
    return 0.5 * (A + A.T)


def weighted_hat(design: CenteredDesign, lam) -> np.ndarray:
    A = ridge_matrix(design.Sigma, lam)
    return (1.0 + design.Xc @ A @ design.Xc.T) / design.n


@dataclass
class _State:
    d: np.ndarray
    F: float
    Qhat: np.ndarray
    mask: np.ndarray
    qp_iterations: int
    A: np.ndarray


class FrisoProblem:
    """Data-dependent pieces shared by every objective evaluation."""

    def __init__(self, X, Y, bounds: SupportBounds = SupportBounds()):
        self.design = center_design(X)
        self.Y = np.asarray(validate_quantile_matrix(Y))
        if self.Y.shape[0] != self.design.n:
            raise ValueError(f"X has {self.design.n} rows but Y has {self.Y.shape[0]}")
        self.bounds = bounds
        self.Ybar = self.Y.mean(axis=0)
        self.Z = self.design.Xc.T @ self.Y

    @property
    def n(self):
        return self.design.n

    @property
    def m(self):
        return self.Y.shape[1]

    @property
    def p(self):
        return self.design.p

    def unprojected(self, lam) -> np.ndarray:
        A = _ridge_parts(self.design.Sigma, np.sqrt(np.asarray(lam, dtype=float)))
        return self.Ybar + self.design.Xc @ (A @ self.Z) / self.n

    def evaluate(self, d, warm=None) -> _State:
        """Objective at ``lambda = d**2``; ``d`` may carry signs."""
        A = _ridge_parts(self.design.Sigma, d)
        fitted = self.Ybar + self.design.Xc @ (A @ self.Z) / self.n
        Q, mask, iters = project_rows(fitted, self.bounds, warm)
        r = Q - self.Y
        F = float(np.einsum("ij,ij->", r, r) / self.m)
        return _State(d, F, Q, mask, int(iters.sum()), A)

    def grad_lambda(self, st: _State) -> np.ndarray:
        """Gradient in ``lambda`` with the working sets of ``st`` held fixed.

        Uses ``dA/dlambda_j = u_j u_j'`` with ``u_j = (I - A Sigma) e_j``,
        which stays finite at ``lambda_j = 0``.
        """
        R = block_average(st.mask, st.Qhat - self.Y)
        M = (self.design.Xc.T @ R) @ self.Z.T
        U = np.eye(self.p) - st.A @ self.design.Sigma
        return np.einsum("aj,aj->j", U, (M + M.T) @ U) / (self.m * self.n)

    def tangent_gradient(self, w, tau, st: _State) -> np.ndarray:
        g = 2.0 * tau * self.grad_lambda(st) * w
        return g - np.dot(w, g) * w


def friso_objective(point: SpherePoint, X, Y, bounds=SupportBounds(), warm=None):
    """Returns ``(F, Qhat, active_sets)`` at ``lambda = tau * w**2``."""
    prob = FrisoProblem(X, Y, bounds)
    st = prob.evaluate(math.sqrt(point.tau) * point.w, _warm_mask(warm, prob))
    return st.F, st.Qhat, [ActiveSet.from_mask(r) for r in st.mask]


def friso_gradient(point: SpherePoint, X, Y, bounds=SupportBounds(), warm=None) -> np.ndarray:
    """Tangent-space gradient at ``point`` for the working sets the objective settles on."""
    prob = FrisoProblem(X, Y, bounds)
    st = prob.evaluate(math.sqrt(point.tau) * point.w, _warm_mask(warm, prob))
    return prob.tangent_gradient(point.w, point.tau, st)


def _warm_mask(warm, prob):
    if warm is None or isinstance(warm, np.ndarray):
        return warm
    return np.stack([a.to_mask(prob.m) for a in warm])


def geodesic_step(point: SpherePoint, direction, alpha: float) -> SpherePoint:
    d = np.asarray(direction, dtype=float)
    nd = np.linalg.norm(d)
    if nd == 0:
        return point
    theta = alpha * nd
    w = point.w * math.cos(theta) + (d / nd) * math.sin(theta)
    return SpherePoint(w, point.tau)


def solve_friso(
    X,
    Y,
    tau: float,
    bounds: SupportBounds = SupportBounds(),
    config: DescentConfig = DescentConfig(),
    init: SpherePoint | None = None,
    warm=None,
    *,
    reuse_active_sets: bool = True,
    callback: Callable[[dict], None] | None = None,
    problem: FrisoProblem | None = None,
) -> FrisoResult:
    """Minimize the weighted-fit discrepancy over the tau-simplex.

    Each iteration takes a geodesic step along the negative tangent gradient
    (blended with the transported previous direction when ``impulse > 0``).
    The step length is a Newton step on the directional curvature, estimated
    from one extra gradient at a short probe along the geodesic, and is
    shrunk until the objective decreases.

    Coordinates with ``w_j = 0`` are stationary on the sphere whatever their
    gradient, so whenever descent stops the simplex optimality conditions are
    checked and near-zero coordinates that should enter are reseeded.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    prob = problem if problem is not None else FrisoProblem(X, Y, bounds)
    p = prob.p
    point = SpherePoint(init.w, tau) if init is not None else SpherePoint.uniform(p, tau)
    rt = math.sqrt(tau)
    warm_mask = _warm_mask(warm, prob)

    def evaluate(w, mask):
        return prob.evaluate(rt * w, mask if reuse_active_sets else None)

    st = evaluate(point.w, warm_mask)
    qp_total = st.qp_iterations
    history = [st.F]
    if p == 1:
        return _finish(prob, point, st, 0, True, 0.0, history, qp_total)

    w = point.w
    g = prob.tangent_gradient(w, tau, st)
    prev = None
    converged = False
    stalled = False
    reseeds = 0
    it = 0
    while True:
        gnorm = float(np.linalg.norm(g))
        if gnorm <= config.epsilon or stalled or it >= config.max_iter:
            moved = None
            if reseeds < MAX_RESEEDS_PER_COORD * p and it < config.max_iter:
                moved = _reenter(prob, w, tau, st, config, evaluate)
            if moved is None:
                converged = gnorm <= config.epsilon
                break
            reseeds += 1
            w, stn, backtracks = moved
            qp_total += stn.qp_iterations
            theta = float(np.arccos(np.clip(np.dot(w, point.w), -1.0, 1.0)))
        else:
            d = -g
            if config.impulse > 0 and prev is not None:
                d = d + config.impulse * prev
                if np.dot(d, g) >= 0:
                    d = -g
            dn = float(np.linalg.norm(d))
            u = d / dn
            slope = float(np.dot(g, u))

            wp = _geodesic(w, u, PROBE)
            stp = evaluate(wp, st.mask)
            qp_total += stp.qp_iterations
            gp = prob.tangent_gradient(wp, tau, stp)
            curv = (float(np.dot(gp, -w * math.sin(PROBE) + u * math.cos(PROBE))) - slope) / PROBE
            theta = -slope / curv if curv > 0 else dn
            theta = min(theta, math.pi / 2)

            stn = None
            for backtracks in range(config.max_backtracks + 1):
                wn = _geodesic(w, u, theta)
                trial = evaluate(wn, st.mask)
                qp_total += trial.qp_iterations
                if trial.F < st.F:
                    stn = trial
                    break
                theta *= config.step_shrink
            if stn is None:
                stalled = True
                continue
            prev = dn * (-w * math.sin(theta) + u * math.cos(theta))
            w = wn
        changes = int(np.count_nonzero(stn.mask != st.mask))
        st = stn
        stalled = False
        it += 1
        point = SpherePoint(w, tau)
        w = point.w
        g = prob.tangent_gradient(w, tau, st)
        if prev is not None:
            prev = prev - np.dot(prev, w) * w
        history.append(st.F)
        if callback is not None:
            callback(
                {
                    "iteration": it,
                    "objective": st.F,
                    "gradient_norm": float(np.linalg.norm(g)),
                    "step": theta,
                    "backtracks": backtracks,
                    "active_set_changes": changes,
                }
            )
    return _finish(prob, SpherePoint(w, tau), st, it, converged, float(np.linalg.norm(g)), history, qp_total)


def _reenter(prob, w, tau, st, config, evaluate):
    """Give mass to near-zero coordinates whose lambda-gradient undercuts the
    weighted mean; returns ``(w, state, backtracks)`` or None."""
    p = w.size
    lam = tau * w**2
    grad = prob.grad_lambda(st)
    nu = float(np.dot(lam, grad) / tau)
    small = lam < REENTRY_WEIGHT * tau / p
    cand = small & (grad < nu - REENTRY_GAP * max(abs(nu), 1.0))
    if not cand.any() or cand.all():
        return None
    sign = np.where(w < 0, -1.0, 1.0)
    delta = 0.1 * tau / p
    for backtracks in range(config.max_backtracks + 1):
        new = lam.copy()
        new[cand] = np.maximum(lam[cand], delta)
        new[~cand] *= (tau - new[cand].sum()) / lam[~cand].sum()
        wn = sign * np.sqrt(new / tau)
        trial = evaluate(wn, st.mask)
        if trial.F < st.F:
            return wn, trial, backtracks
        delta *= config.step_shrink
    return None


def _geodesic(w, u, theta):
    out = w * math.cos(theta) + u * math.sin(theta)
    return out / np.linalg.norm(out)


def _finish(prob, point, st, it, converged, gnorm, history, qp_total):
    lam = SimplexWeights.from_sphere(point.w, point.tau, clamp=CLAMP)
    if np.array_equal(lam.lam, point.lam):
        final = st
    else:
        final = prob.evaluate(np.sqrt(lam.lam), st.mask)
        qp_total += final.qp_iterations
    return FrisoResult(
        lam=lam,
        objective=final.F,
        iterations=it,
        converged=converged,
        active_sets=[ActiveSet.from_mask(r) for r in final.mask],
        gradient_norm=gnorm,
        point=point,
        history=history,
        qp_iterations=qp_total,
        mask=final.mask,
    )


def solution_path(
    X,
    Y,
    tau_grid,
    bounds: SupportBounds = SupportBounds(),
    config: DescentConfig = DescentConfig(),
    *,
    warm_start: bool = True,
    problem: FrisoProblem | None = None,
) -> PathResult:
    """Solve along an increasing tau grid, each solution seeding the next.

    With ``warm_start=False`` every tau starts from the uniform point with
    empty working sets.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or taus.size == 0:
        raise ValueError("tau grid must be a non-empty vector")
    if np.any(taus <= 0) or np.any(np.diff(taus) <= 0):
        raise ValueError("tau grid must be positive and strictly increasing")
    prob = problem if problem is not None else FrisoProblem(X, Y, bounds)
    results = []
    prev = None
    for tau in taus:
        if warm_start and prev is not None:
            res = solve_friso(None, None, tau, config=config, init=prev.point, warm=prev.mask, problem=prob)
        else:
            res = solve_friso(None, None, tau, config=config, reuse_active_sets=warm_start, problem=prob)
        results.append(res)
        prev = res
    lambdas = np.column_stack([r.lam.lam for r in results])
    return PathResult(taus, lambdas, results)
