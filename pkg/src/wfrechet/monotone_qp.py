"""Projection onto bounded non-decreasing vectors by a dual active-set method.

Constraint indexing for a vector of length m:

    0          q[0] >= lower               (only if lower is finite)
    j=1..m-1   q[j] - q[j-1] >= 0
    m          -q[m-1] >= -upper           (only if upper is finite)

Every working set is a partition of 0..m-1 into consecutive blocks (joined by
active difference constraints), with the first block optionally pinned to
``lower`` and the last optionally pinned to ``upper``. The equality-constrained
subproblem for a working set is then solved in O(m): free blocks take the mean
of ``a`` and multipliers follow from a running sum of residuals.
"""

from __future__ import annotations

from dataclasses import dataclass
import json

import numba
import numpy as np

from .core import SolverError, SupportBounds

VIOLATION_TOL = 1e-12
DUAL_TOL = 1e-12


@dataclass(frozen=True)
class ActiveSet:
    indices: tuple[int, ...] = ()

    @classmethod
    def from_mask(cls, mask) -> "ActiveSet":
        return cls(tuple(int(i) for i in np.flatnonzero(mask)))

    def to_mask(self, m: int) -> np.ndarray:
        mask = np.zeros(m + 1, dtype=np.bool_)
        for c in self.indices:
            if not 0 <= c <= m:
                raise ValueError(f"constraint index {c} out of range for m={m}")
            mask[c] = True
        return mask

    def to_json(self) -> str:
        return json.dumps(sorted(self.indices))

    @classmethod
    def from_json(cls, text: str) -> "ActiveSet":
        return cls(tuple(sorted(int(c) for c in json.loads(text))))

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class ProjectionResult:
    q: np.ndarray
    active: ActiveSet
    iterations: int
    dual: dict


@numba.njit(cache=True, nogil=True)
def _solve_eqp(a, lo, hi, W, q, mu):
    m = a.size
    s = 0
    while s < m:
        e = s
        while e + 1 < m and W[e + 1]:
            e += 1
        pin_lo = s == 0 and W[0]
        pin_hi = e == m - 1 and W[m]
        if pin_lo and pin_hi:
            return False
        if pin_lo:
            v = lo
        elif pin_hi:
            v = hi
        else:
            tot = 0.0
            for k in range(s, e + 1):
                tot += a[k]
            v = tot / (e - s + 1)
        acc = 0.0
        if pin_lo:
            for k in range(s, e + 1):
                acc += lo - a[k]
        if s == 0:
            mu[0] = acc
        else:
            mu[s] = 0.0
        for k in range(s, e + 1):
            q[k] = v
            acc += a[k] - v
            if k < e:
                mu[k + 1] = acc
        if e == m - 1:
            mu[m] = acc if pin_hi else 0.0
        s = e + 1
    return True


@numba.njit(cache=True, nogil=True)
def _sanitize(W, has_lo, has_hi):
    m = W.size - 1
    if not has_lo:
        W[0] = False
    if not has_hi:
        W[m] = False
    if W[0] and W[m]:
        chained = True
        for j in range(1, m):
            if not W[j]:
                chained = False
                break
        if chained:
            W[m] = False


@numba.njit(cache=True, nogil=True)
def _dual_active_set(a, lo, hi, has_lo, has_hi, W, q, mu, max_iter):
    """Run the dual active-set iteration in place; returns (iterations, status).

    status 0 = optimal, 1 = iteration limit exceeded, 2 = infeasible subproblem.
    """
    m = a.size
    _sanitize(W, has_lo, has_hi)
    lam = np.zeros(m + 1)
    have_lam = False
    it = 0
    while True:
        if not _solve_eqp(a, lo, hi, W, q, mu):
            return it, 2
        neg = False
        for c in range(m + 1):
            if W[c] and mu[c] < -DUAL_TOL:
                neg = True
                break
        if not neg:
            for c in range(m + 1):
                lam[c] = max(mu[c], 0.0) if W[c] else 0.0
            have_lam = True
            best = -1
            best_v = VIOLATION_TOL
            if has_lo and not W[0]:
                v = lo - q[0]
                if v > best_v:
                    best, best_v = 0, v
            for j in range(1, m):
                if not W[j]:
                    v = q[j - 1] - q[j]
                    if v > best_v:
                        best, best_v = j, v
            if has_hi and not W[m]:
                v = q[m - 1] - hi
                if v > best_v:
                    best, best_v = m, v
            if best < 0:
                return it, 0
            W[best] = True
            lam[best] = 0.0
        else:
            blk = -1
            if have_lam:
                # longest dual step keeping every multiplier non-negative
                t = np.inf
                for c in range(m + 1):
                    if W[c] and mu[c] < -DUAL_TOL:
                        r = lam[c] / (lam[c] - mu[c])
                        if r < t:
                            t = r
                            blk = c
                for c in range(m + 1):
                    if W[c]:
                        lam[c] = max(lam[c] + t * (mu[c] - lam[c]), 0.0)
            else:
                worst = 0.0
                for c in range(m + 1):
                    if W[c] and mu[c] < worst:
                        worst = mu[c]
                        blk = c
            W[blk] = False
            lam[blk] = 0.0
        it += 1
        if it > max_iter:
            return it, 1


@numba.njit(cache=True, nogil=True)
def _polish(q, lo, hi):
    # absorb sub-tolerance violations so feasibility is exact
    run = q[0]
    for k in range(q.size):
        if q[k] < run:
            q[k] = run
        else:
            run = q[k]
        if q[k] < lo:
            q[k] = lo
        elif q[k] > hi:
            q[k] = hi


@numba.njit(cache=True, nogil=True)
def _project_rows(A, lo, hi, has_lo, has_hi, W, Q, iters):
    n, m = A.shape
    mu = np.empty(m + 1)
    worst = 0
    for i in range(n):
        it, status = _dual_active_set(A[i], lo, hi, has_lo, has_hi, W[i], Q[i], mu, 10 * (m + 1))
        iters[i] = it
        if status != 0:
            return i, status
        _polish(Q[i], lo, hi)
    return -1, 0


def _check_finite(a):
    if not np.all(np.isfinite(a)):
        raise ValueError("projection input has non-finite entries")


def project_monotone(a, bounds: SupportBounds = SupportBounds(), warm: ActiveSet | None = None) -> ProjectionResult:
    """Euclidean projection of ``a`` onto non-decreasing vectors in ``[lower, upper]``.

    ``warm`` seeds the working set; the solution does not depend on it, only
    the number of working-set changes does.
    """
    a = np.ascontiguousarray(a, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("projection input must be a non-empty vector")
    _check_finite(a)
    m = a.size
    lo, hi = bounds.lower, bounds.upper
    if m == 1:
        q = np.array([min(max(a[0], lo), hi)])
        if a[0] < lo:
            W, dual = (0,), {0: lo - a[0]}
        elif a[0] > hi:
            W, dual = (1,), {1: a[0] - hi}
        else:
            W, dual = (), {}
        start = set(warm.indices) if warm is not None else set()
        return ProjectionResult(q, ActiveSet(W), len(start.symmetric_difference(W)), dual)

    W = warm.to_mask(m) if warm is not None else np.zeros(m + 1, dtype=np.bool_)
    q = np.empty(m)
    mu = np.empty(m + 1)
    it, status = _dual_active_set(a, lo, hi, bounds.has_lower, bounds.has_upper, W, q, mu, 10 * (m + 1))
    _raise_status(status, it)
    _polish(q, lo, hi)
    dual = {int(c): float(max(mu[c], 0.0)) for c in np.flatnonzero(W)}
    return ProjectionResult(q, ActiveSet.from_mask(W), int(it), dual)


def _raise_status(status, it, row=None):
    where = "" if row is None else f" on row {row}"
    if status == 1:
        raise SolverError(f"dual active-set solver exceeded {it - 1} working-set changes{where}")
    if status == 2:
        raise SolverError(f"working set produced an infeasible equality system{where}")


def project_rows(A, bounds: SupportBounds, warm=None):
    """Project each row of ``A``; working sets travel as an ``n x (m+1)`` bool mask.

    Returns ``(Q, mask, iterations)`` where ``iterations`` is per row. The
    input mask is not modified.
    """
    A = np.ascontiguousarray(A, dtype=float)
    _check_finite(A)
    n, m = A.shape
    if warm is None:
        W = np.zeros((n, m + 1), dtype=np.bool_)
    else:
        W = np.array(warm, dtype=np.bool_)
        if W.shape != (n, m + 1):
            raise ValueError(f"warm mask has shape {W.shape}, expected {(n, m + 1)}")
    Q = np.empty_like(A)
    iters = np.zeros(n, dtype=np.int64)
    row, status = _project_rows(A, bounds.lower, bounds.upper, bounds.has_lower, bounds.has_upper, W, Q, iters)
    if status:
        _raise_status(status, iters[row], row)
    return Q, W, iters


def block_average(mask, v):
    """Apply the projection Jacobian for working set ``mask`` to rows of ``v``.

    Free blocks are replaced by their mean; bound-pinned blocks map to zero.
    """
    v = np.ascontiguousarray(v, dtype=float)
    out = np.empty_like(v)
    _block_average(np.asarray(mask, dtype=np.bool_), v, out)
    return out


@numba.njit(cache=True, nogil=True)
def _block_average(W, V, out):
    n, m = V.shape
    for i in range(n):
        s = 0
        while s < m:
            e = s
            while e + 1 < m and W[i, e + 1]:
                e += 1
            if (s == 0 and W[i, 0]) or (e == m - 1 and W[i, m]):
                v = 0.0
            else:
                v = 0.0
                for k in range(s, e + 1):
                    v += V[i, k]
                v /= e - s + 1
            for k in range(s, e + 1):
                out[i, k] = v
            s = e + 1


def pava_clip_oracle(a, bounds: SupportBounds = SupportBounds()) -> np.ndarray:
    """Unweighted pool-adjacent-violators followed by clipping to the bounds."""
    a = np.asarray(a, dtype=float)
    _check_finite(a)
    means, sizes = [], []
    for x in a:
        means.append(float(x))
        sizes.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            s = sizes[-2] + sizes[-1]
            means[-2] = (means[-2] * sizes[-2] + means[-1] * sizes[-1]) / s
            sizes[-2] = s
            means.pop()
            sizes.pop()
    out = np.repeat(means, sizes)
    return np.clip(out, bounds.lower, bounds.upper)
