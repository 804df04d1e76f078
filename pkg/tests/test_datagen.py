import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wfrechet.core import make_grid
from wfrechet.datagen import ZinbLinks, ZinbParams, generate_zinbinom_qf, quantile_rows, zinb_quantile


def mp_quantile(u, pi0, r, mu, dps=50):
    """Zero-inflated NB quantile by exact-precision pmf accumulation."""
    with mpmath.workdps(dps):
        r, mu, pi0, u = map(mpmath.mpf, (r, mu, pi0, u))
        prob = r / (r + mu)
        cdf = mpmath.mpf(0)
        k = 0
        while True:
            cdf += mpmath.gamma(k + r) / (mpmath.gamma(r) * mpmath.factorial(k)) * prob**r * (1 - prob) ** k
            if pi0 + (1 - pi0) * cdf >= u:
                return k
            k += 1


def test_point_mass_at_zero():
    q = zinb_quantile(make_grid(100).levels, ZinbParams(1 - 1e-12, 2.0, 5.0))
    assert np.all(q == 0)


def test_geometric_median_is_zero():
    # NB(r=1, mean 1) is geometric with success probability 1/2, so F(0) = 1/2
    assert zinb_quantile(0.5, ZinbParams(0.0, 1.0, 1.0)) == 0.0
    assert zinb_quantile(0.5 + 1e-9, ZinbParams(0.0, 1.0, 1.0)) == 1.0


def test_matches_arbitrary_precision_oracle():
    params = ZinbParams(0.3, 2.0, 5.0)
    grid = make_grid(100).levels
    q = zinb_quantile(grid, params)
    assert np.all(np.diff(q) >= 0)
    assert np.all(q == np.round(q))
    assert q[0] == 0
    expected = [mp_quantile(u, 0.3, 2.0, 5.0) for u in grid]
    assert q.tolist() == expected


@pytest.mark.parametrize("pi0,r,mu", [(0.1, 0.3, 12.0), (0.0, 8.0, 0.5), (0.6, 1.5, 30.0)])
def test_oracle_other_parameters(pi0, r, mu):
    grid = make_grid(40).levels
    assert zinb_quantile(grid, ZinbParams(pi0, r, mu)).tolist() == [mp_quantile(u, pi0, r, mu) for u in grid]


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0, 0.95),
    st.floats(0.05, 20),
    st.floats(0.05, 50),
    st.floats(1e-6, 1 - 1e-6),
    st.floats(1e-6, 1 - 1e-6),
)
def test_quantile_monotone_in_level(pi0, r, mu, u1, u2):
    p = ZinbParams(pi0, r, mu)
    lo, hi = sorted((u1, u2))
    assert zinb_quantile(lo, p) <= zinb_quantile(hi, p)


def test_level_outside_unit_interval():
    for u in [0.0, 1.0, -0.1, np.nan]:
        with pytest.raises(ValueError):
            zinb_quantile(u, ZinbParams(0.1, 1.0, 1.0))


def test_param_validation():
    with pytest.raises(ValueError):
        ZinbParams(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ZinbParams(0.1, 0.0, 1.0)


def test_default_simulation_shapes():
    X, Y = generate_zinbinom_qf(100, 100, 10, seed=1)
    assert X.shape == (100, 10) and Y.shape == (100, 100)
    assert np.all(Y >= 0)
    assert np.all(np.diff(Y, axis=1) >= 0)
    assert np.all(Y == np.round(Y))
    assert np.all(np.abs(X) <= 1)


def test_seed_determinism():
    a = generate_zinbinom_qf(30, 20, 6, seed=7)
    b = generate_zinbinom_qf(30, 20, 6, seed=7)
    c = generate_zinbinom_qf(30, 20, 6, seed=8)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], c[0])


def test_only_first_four_covariates_matter():
    X, Y = generate_zinbinom_qf(40, 30, 8, seed=3)
    X2 = X.copy()
    X2[:, 4:] = np.random.default_rng(0).permutation(X2[:, 4:].T).T[::-1]
    np.testing.assert_array_equal(quantile_rows(X2, 30), Y)
    X3 = X.copy()
    X3[:, 1] = -X3[:, 1]
    assert not np.array_equal(quantile_rows(X3, 30), Y)


def test_requires_four_covariates():
    with pytest.raises(ValueError):
        generate_zinbinom_qf(10, 10, 3)


def test_custom_links():
    weak = ZinbLinks(pi0_slope=1.0, mu_slope=0.8, r_slope=0.8)
    X, Y = generate_zinbinom_qf(20, 15, 5, seed=1, links=weak)
    assert np.array_equal(quantile_rows(X, 15, weak), Y)
    assert not np.array_equal(generate_zinbinom_qf(20, 15, 5, seed=1)[1], Y)
