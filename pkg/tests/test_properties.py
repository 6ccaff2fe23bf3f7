"""Property-based checks of the module invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toepcov import (SecurityParams, TierParams, connection_outage, dense_exp_oracle, exp_first_column,
                     gain_actual, gain_cosine, gauss_2f1, hetnet_coverage, hetnet_qki, hyp_3f2, inv_first_column,
                     l1_exp, p_requests, reg_lower_inc_gamma, secrecy_outage_ub)
from toepcov.toeplitz import convolve_columns

entry = st.floats(-2.0, 2.0, allow_nan=False)
columns = st.lists(entry, min_size=1, max_size=16)
SETTINGS = settings(max_examples=60, deadline=None)


@SETTINGS
@given(columns)
def test_exp_column_matches_dense(q):
    assert np.max(np.abs(exp_first_column(q) - dense_exp_oracle(q)[:, 0])) <= 1e-10


@SETTINGS
@given(columns)
def test_semigroup(q):
    x = exp_first_column(q)
    assert np.max(np.abs(convolve_columns(x, x) - exp_first_column(2 * np.array(q)))) <= 1e-9 * max(1, np.abs(x).max() ** 2)


@SETTINGS
@given(columns.filter(lambda q: abs(q[0]) > 0.5))
def test_inverse_convolution(q):
    e = convolve_columns(inv_first_column(q), q)
    target = np.zeros(len(q))
    target[0] = 1.0
    assert np.max(np.abs(e - target)) <= 1e-10 * max(1.0, np.abs(inv_first_column(q)).max())


@SETTINGS
@given(st.floats(-700, 700))
def test_scalar_reduction(q0):
    assert l1_exp([q0]) == math.exp(q0)


@SETTINGS
@given(st.floats(-0.95, 3.0), st.floats(1.0, 6.0), st.floats(0.05, 4.0), st.floats(-40.0, 0.0))
def test_2f1_contiguity(a, b, c1, z):
    c = a + c1 + 0.5
    f = gauss_2f1(a, b, c, z)
    g = gauss_2f1(a - 1, b, c, z)
    h = gauss_2f1(a, b, c + 1, z)
    scale = max(abs(c * (1 - z) * f), abs(c * g), abs((c - b) * z * h), 1e-300)
    assert abs(c * (1 - z) * f - c * g + (c - b) * z * h) <= 1e-8 * scale


@SETTINGS
@given(st.floats(0.1, 2.5), st.floats(0.5, 4.0), st.floats(0.3, 3.0), st.floats(1.2, 4.0), st.floats(-0.99, 0.6))
def test_3f2_reduction(a, b, a3, c, z):
    assert hyp_3f2(a, b, a3, c, a3, z) == pytest.approx(gauss_2f1(a, b, c, z), rel=1e-8)


@SETTINGS
@given(st.floats(0.1, 30.0), st.lists(st.floats(0.0, 100.0), min_size=2, max_size=20))
def test_inc_gamma_monotone(M, xs):
    vals = [reg_lower_inc_gamma(M, x) for x in sorted(xs)]
    assert all(0 <= v <= 1 for v in vals)
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@SETTINGS
@given(st.integers(1, 12), st.floats(0.0, 30.0))
def test_request_masses_sum_to_one(nt, d0):
    p = SecurityParams(1e-2, 1e-3, nt, 1.0, d0, 4.0)
    masses = [p_requests(n, p) for n in range(1, nt + 1)]
    assert all(m >= 0 for m in masses)
    assert sum(masses) == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.floats(0.0, 6.0), st.floats(2.5, 5.0),
       st.lists(st.floats(-2.0, 3.0), min_size=2, max_size=5))
def test_outage_monotone(nt, d0, alpha, lg):
    p = SecurityParams(1e-2, 1e-3, nt, 1.0, d0, alpha)
    gs = 10.0 ** np.sort(lg)
    co = [connection_outage(p, g) for g in gs]
    so = [secrecy_outage_ub(p, g) for g in gs]
    assert all(0 <= v <= 1 for v in co + so)
    assert all(b >= a - 1e-12 for a, b in zip(co, co[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(so, so[1:]))


tier = st.builds(lambda lam, P, B, m, u: TierParams(lam, P, B, m, min(u, m)),
                 st.floats(1e-5, 1e-3), st.floats(0.1, 50.0), st.floats(0.5, 4.0),
                 st.integers(1, 4), st.integers(1, 4))


@settings(max_examples=30, deadline=None)
@given(st.lists(tier, min_size=1, max_size=3), st.floats(2.5, 5.0), st.floats(0.05, 20.0),
       st.floats(0.1, 100.0))
def test_hetnet_range_monotone_scaling(tiers, alpha, gamma, scale):
    a = hetnet_coverage(tiers, gamma, alpha).value
    b = hetnet_coverage(tiers, 2 * gamma, alpha).value
    assert 0 <= b <= a + 1e-12 <= 1 + 1e-12
    scaled = [TierParams(t.lam, scale * t.P, t.B, t.Mant, t.U) for t in tiers]
    assert hetnet_coverage(scaled, gamma, alpha).value == pytest.approx(a, abs=1e-12)
    assert hetnet_qki(scaled, 0, 1, gamma, alpha) == pytest.approx(hetnet_qki(tiers, 0, 1, gamma, alpha), rel=1e-10)


@SETTINGS
@given(st.integers(1, 256), st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=50))
def test_pattern_ranges(nt, phis):
    phi = np.array(phis)
    ga = gain_actual(phi, nt)
    gc = gain_cosine(phi, nt)
    assert np.all((ga >= 0) & (ga <= 1 + 1e-12))
    assert np.all((gc >= 0) & (gc <= 1))
    assert np.all(gc <= (np.abs(phi) <= 1.0 / nt))
