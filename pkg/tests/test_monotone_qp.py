import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import constraint_rows, enumerate_qp
from wfrechet.core import SupportBounds
from wfrechet.monotone_qp import (
    ActiveSet,
    block_average,
    pava_clip_oracle,
    project_monotone,
    project_rows,
)

INF = math.inf
BOUND_CHOICES = [SupportBounds(), SupportBounds(0, INF), SupportBounds(-INF, 0.5), SupportBounds(-0.3, 0.4)]


def random_bounds(rng):
    return BOUND_CHOICES[rng.integers(len(BOUND_CHOICES))]


def test_already_feasible():
    r = project_monotone([1, 2, 3])
    assert r.q.tolist() == [1, 2, 3]
    assert r.active.indices == () and r.iterations == 0


def test_decreasing_pair_pools():
    assert project_monotone([2, 1]).q.tolist() == [1.5, 1.5]


def test_pool_then_clip_upper():
    a, b = [3, 1, 2], SupportBounds(0, 1.5)
    r = project_monotone(a, b)
    np.testing.assert_array_equal(r.q, [1.5, 1.5, 1.5])
    np.testing.assert_array_equal(pava_clip_oracle(a, b), r.q)


def test_clip_lower():
    a, b = [-1, 0.5], SupportBounds(0, INF)
    r = project_monotone(a, b)
    np.testing.assert_array_equal(r.q, [0, 0.5])
    np.testing.assert_array_equal(pava_clip_oracle(a, b), r.q)


def test_oracle_examples():
    assert pava_clip_oracle([2, 1]).tolist() == [1.5, 1.5]
    assert pava_clip_oracle([1, 2, 3], SupportBounds(0, 2)).tolist() == [1, 2, 2]


def test_oracle_matches_enumeration():
    rng = np.random.default_rng(5)
    b = SupportBounds(0, 1)
    for _ in range(5):
        a = rng.standard_normal(6)
        np.testing.assert_allclose(pava_clip_oracle(a, b), enumerate_qp(a, 0, 1), atol=1e-12)


@pytest.mark.parametrize("a,lo,hi,q", [(0.3, -1, 1, 0.3), (-5, 0, 1, 0.0), (5, 0, 1, 1.0), (2.0, -INF, INF, 2.0)])
def test_single_coordinate_clamps(a, lo, hi, q):
    r = project_monotone([a], SupportBounds(lo, hi))
    assert r.q.tolist() == [q]
    assert all(v >= 0 for v in r.dual.values())


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        project_monotone([1.0, np.nan])
    with pytest.raises(ValueError):
        pava_clip_oracle([np.inf])


def kkt_residual(a, r, bounds):
    """Stationarity residual of q - a = sum mu_c n_c over the reported duals."""
    m = a.size
    rows = constraint_rows(m, bounds.lower, bounds.upper)
    g = r.q - a
    for c, mu in r.dual.items():
        g = g - mu * rows[c][0]
    return np.abs(g).max()


@settings(max_examples=300, deadline=None)
@given(
    arrays(float, st.integers(1, 60), elements=st.floats(-100, 100, allow_nan=False)),
    st.sampled_from(BOUND_CHOICES),
)
def test_matches_oracle_and_kkt(a, bounds):
    r = project_monotone(a, bounds)
    np.testing.assert_allclose(r.q, pava_clip_oracle(a, bounds), rtol=0, atol=1e-10 * max(1.0, np.abs(a).max()))
    assert np.all(np.diff(r.q) >= 0)
    assert np.all(r.q >= bounds.lower) and np.all(r.q <= bounds.upper)
    assert all(mu >= -1e-10 for mu in r.dual.values())
    if a.size > 1:
        assert kkt_residual(a, r, bounds) <= 1e-9 * max(1.0, np.abs(a).max())


def test_oracle_equivalence_bulk():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        m = int(rng.integers(1, 201))
        a = rng.standard_normal(m)
        b = random_bounds(rng)
        assert np.abs(project_monotone(a, b).q - pava_clip_oracle(a, b)).max() <= 1e-10


def test_idempotent_on_feasible():
    rng = np.random.default_rng(2)
    for _ in range(50):
        q = np.sort(rng.uniform(0, 1, rng.integers(1, 50)))
        r = project_monotone(q, SupportBounds(0, 1))
        np.testing.assert_array_equal(r.q, q)
        assert r.iterations == 0


def test_non_expansive():
    rng = np.random.default_rng(3)
    for _ in range(200):
        m = int(rng.integers(1, 80))
        a, b = rng.standard_normal(m), rng.standard_normal(m)
        bounds = random_bounds(rng)
        pa, pb = project_monotone(a, bounds).q, project_monotone(b, bounds).q
        assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12


def test_warm_start_gives_same_solution():
    rng = np.random.default_rng(4)
    for _ in range(300):
        m = int(rng.integers(1, 60))
        a = rng.standard_normal(m)
        bounds = random_bounds(rng)
        cold = project_monotone(a, bounds)
        candidates = [
            cold.active,
            ActiveSet(tuple(range(m + 1))),
            ActiveSet(tuple(int(c) for c in np.flatnonzero(rng.random(m + 1) < 0.5))),
            ActiveSet(tuple(int(c) for c in np.flatnonzero(rng.random(m + 1) < 0.9))),
        ]
        for warm in candidates:
            r = project_monotone(a, bounds, warm)
            assert np.abs(r.q - cold.q).max() <= 1e-10
        assert project_monotone(a, bounds, cold.active).iterations == 0


def test_warm_start_not_slower_on_perturbed_problem():
    rng = np.random.default_rng(6)
    warm_its, cold_its = [], []
    for _ in range(200):
        m = int(rng.integers(5, 150))
        a = np.cumsum(rng.standard_normal(m)) * 0.3 + rng.standard_normal(m)
        bounds = random_bounds(rng)
        prev = project_monotone(a, bounds)
        b = a + rng.uniform(-1e-3, 1e-3, m)
        cold_its.append(project_monotone(b, bounds).iterations)
        warm_its.append(project_monotone(b, bounds, prev.active).iterations)
    assert np.median(warm_its) <= np.median(cold_its)


def test_project_rows_matches_single_calls():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((20, 15))
    b = SupportBounds(-0.5, 0.5)
    Q, mask, iters = project_rows(A, b)
    for i in range(20):
        r = project_monotone(A[i], b)
        np.testing.assert_array_equal(Q[i], r.q)
        assert ActiveSet.from_mask(mask[i]) == r.active
        assert iters[i] == r.iterations
    Q2, _, iters2 = project_rows(A, b, mask)
    np.testing.assert_array_equal(Q, Q2)
    assert iters2.sum() == 0


def test_block_average_is_projection_jacobian():
    rng = np.random.default_rng(8)
    b = SupportBounds(-0.4, 0.4)
    for _ in range(20):
        a = rng.standard_normal((1, 12))
        Q, mask, _ = project_rows(a, b)
        v = rng.standard_normal((1, 12))
        h = 1e-7
        Qp, mp, _ = project_rows(a + h * v, b, mask)
        Qm, mm, _ = project_rows(a - h * v, b, mask)
        if not (np.array_equal(mp, mask) and np.array_equal(mm, mask)):
            continue
        np.testing.assert_allclose(block_average(mask, v), (Qp - Qm) / (2 * h), atol=1e-6)


def test_active_set_json_round_trip():
    a = ActiveSet((5, 1, 3))
    assert a.to_json() == "[1, 3, 5]"
    assert ActiveSet.from_json(a.to_json()).indices == (1, 3, 5)
    with pytest.raises(ValueError):
        a.to_mask(3)


def test_exhaustive_enumeration():
    rng = np.random.default_rng(9)
    for _ in range(200):
        m = int(rng.integers(1, 7))
        a = rng.standard_normal(m)
        b = random_bounds(rng)
        ref = enumerate_qp(a, b.lower, b.upper)
        assert np.abs(project_monotone(a, b).q - ref).max() <= 1e-10
