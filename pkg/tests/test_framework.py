import math

import numpy as np
import pytest
from scipy import integrate

from toepcov import (CoverageResult, GammaGain, GammaLaw, InterfererClass, RadiusSpec, Scenario,
                     ServingDistance, coverage_theorem1, gain_actual, gain_cosine,
                     nearest_rayleigh_scenario, rayleigh_baseline, serving_distance_pdf, solve_threshold)
from toepcov.exceptions import BracketError, DomainError
from toepcov.framework import (PatternGammaLaw, clamp_probability, coverage_direct_m1, find_bracket,
                               laplace_exponent_quadrature)

RAYLEIGH_G1 = 0.5601


def test_classic_reduction():
    scn = nearest_rayleigh_scenario(M=1)
    assert rayleigh_baseline(1.0) == pytest.approx(RAYLEIGH_G1, abs=5e-5)
    for g in (0.1, 1.0, 10.0):
        assert coverage_theorem1(scn, g).value == pytest.approx(rayleigh_baseline(g), abs=1e-6)


def test_baseline_general_alpha():
    # generic-alpha path at alpha=4 equals the arctan form
    g = 2.0
    delta = 0.5
    val, _ = integrate.quad(lambda u: 1 / (1 + u * u), g ** -delta, np.inf)
    assert rayleigh_baseline(g, 4.0) == pytest.approx(1 / (1 + g ** delta * val), rel=1e-10)
    assert 0 < rayleigh_baseline(1.0, 3.0) < 1


def test_small_gamma_limit():
    assert coverage_theorem1(nearest_rayleigh_scenario(M=3), 1e-9).value == pytest.approx(1.0, abs=1e-6)


def test_more_antennas_more_coverage():
    vals = [coverage_theorem1(nearest_rayleigh_scenario(M=m), 1.0).value for m in (1, 2, 3, 4, 8)]
    assert np.all(np.diff(vals) > 0)
    # M=3 value cross-checked against 1e6-trial Monte Carlo in the acceptance suite
    assert vals[2] == pytest.approx(0.8650983, abs=1e-6)


def test_column_matches_laplace_quadrature():
    scn = nearest_rayleigh_scenario(M=3)
    r0, s = 0.7, 0.9
    q = scn.q_column(r0, s / 0.7 ** 4)
    assert q[0] == pytest.approx(laplace_exponent_quadrature(scn, r0, s), rel=1e-9)


def test_noise_m1_matches_direct_path():
    scn = nearest_rayleigh_scenario(M=1, noise_power=0.5)
    a = coverage_theorem1(scn, 1.0).value
    assert a == pytest.approx(coverage_direct_m1(scn, 1.0), abs=1e-7)
    assert a < coverage_theorem1(nearest_rayleigh_scenario(M=1), 1.0).value


def test_fixed_distance_is_direct():
    scn = Scenario(GammaGain(2, 1.0), 4.0,
                   (InterfererClass(0.1, RadiusSpec(1.0), RadiusSpec(math.inf), GammaLaw(1.0, 1.0)),),
                   ServingDistance("fixed", r0=1.0))
    res = coverage_theorem1(scn, 1.0)
    from toepcov import l1_exp
    assert res.value == l1_exp(scn.q_column(1.0, 1.0))
    assert res.abs_error == 0.0


def test_serving_pdf():
    val, _ = integrate.quad(lambda r: serving_distance_pdf("nearest", 0.3, None, r), 0, np.inf)
    assert val == pytest.approx(1.0, abs=1e-10)
    val, _ = integrate.quad(lambda r: serving_distance_pdf("los_ball", 1e-3, 200.0, r), 0, 200.0)
    assert val == pytest.approx(1.0, abs=1e-10)
    assert serving_distance_pdf("los_ball", 1e-3, 200.0, 250.0) == 0.0
    with pytest.raises(DomainError):
        serving_distance_pdf("bogus", 1.0, None, 1.0)


def test_scenario_validation():
    with pytest.raises(DomainError, match="path-loss exponent must exceed 2"):
        nearest_rayleigh_scenario(alpha=2.0)
    with pytest.raises(DomainError):
        GammaGain(0, 1.0)
    with pytest.raises(DomainError):
        coverage_theorem1(nearest_rayleigh_scenario(), 0.0)


def test_result_and_clamp():
    with pytest.raises(DomainError):
        CoverageResult(1.5)
    with pytest.raises(DomainError):
        CoverageResult(0.5, method="guess")
    r = clamp_probability(1.0 + 1e-3)
    assert r.value == 1.0 and r.warning
    assert clamp_probability(1.0 + 1e-9).warning is None


def test_patterns():
    assert gain_actual(0.0, 16) == 1.0
    assert gain_actual(0.37, 1) == pytest.approx(1.0)
    assert gain_cosine(0.0, 8) == 1.0
    assert gain_cosine(1 / 8, 8) == pytest.approx(0.0, abs=1e-15)
    assert gain_cosine(1 / 16, 8) == pytest.approx(0.5)
    for nt in (4, 16, 64):
        avg, _ = integrate.quad(lambda x: gain_actual(x, nt), -1, 1, limit=400,
                                points=np.linspace(-1, 1, 2 * nt + 1)[1:-1])
        assert avg / 2 == pytest.approx(1 / nt, rel=1e-8)
    phi = np.linspace(-1, 1, 2001)
    for nt in (1, 3, 8):
        ga, gc = gain_actual(phi, nt), gain_cosine(phi, nt)
        assert np.all((ga >= 0) & (ga <= 1 + 1e-12))
        assert np.all(gc <= (np.abs(phi) <= 1 / nt))


def test_pattern_law_moments():
    law = PatternGammaLaw(2.0, 0.5, 8, "cosine")
    assert law.mean() == pytest.approx(1 / 16)
    rng = np.random.default_rng(0)
    assert law.sample(rng, 400_000).mean() == pytest.approx(1 / 16, rel=0.02)


def test_threshold_solver():
    root = solve_threshold(lambda x: x ** 3, 8.0, (0.0, 5.0))
    assert root == pytest.approx(2.0, rel=1e-9)
    with pytest.raises(BracketError):
        solve_threshold(lambda x: x, 10.0, (0.0, 1.0))
    lo, hi = find_bracket(lambda x: x, 1e4, 1.0, 2.0)
    assert lo <= 1e4 <= hi


def test_quadrature_failure_is_reported():
    from toepcov.exceptions import NumericError
    from toepcov.framework import adaptive_quadrature
    val, err = adaptive_quadrature(math.exp, 0.0, 1.0, 1e-10)
    assert val == pytest.approx(math.e - 1, abs=1e-10)
    with pytest.raises(NumericError):
        adaptive_quadrature(lambda x: math.sin(1 / x) / x, 1e-9, 1.0, 1e-12, limit=5)
