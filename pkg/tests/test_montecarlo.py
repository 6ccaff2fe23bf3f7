import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from toepcov import (MmWaveParams, SecurityParams, TierParams, connection_outage, coverage_theorem1,
                     hetnet_coverage, nearest_rayleigh_scenario, rayleigh_baseline, secrecy_outage_ub)
from toepcov.exceptions import DomainError
from toepcov.framework import GammaLaw, InterfererClass, RadiusSpec, Scenario, ServingDistance, GammaGain
from toepcov.mmwave import mmwave_coverage_exact
from toepcov.montecarlo import (BLOCK, McEstimate, block_rng, eavesdropper_radius, mc_connection_outage,
                                mc_coverage_general, mc_coverage_multi, mc_hetnet_coverage,
                                mc_mmwave_coverage, mc_secrecy_outage, sample_ppp, tail_mean,
                                truncation_radius)

FIG1 = SecurityParams(lambda_t=1e-2, lambda_e=1e-3, Nt=4, r0=1.0, d0=3.0, alpha=4.0)


def test_sample_ppp_empty_and_region():
    rng = np.random.default_rng(1)
    assert len(sample_ppp(0.0, 0.0, 10.0, rng)) == 0
    pts = sample_ppp(0.5, 2.0, 5.0, rng)
    assert np.all((pts.radii >= 2.0) & (pts.radii <= 5.0))
    with pytest.raises(DomainError):
        sample_ppp(1.0, 3.0, 2.0, rng)


def test_sample_ppp_counts_and_radial_law():
    rng = np.random.default_rng(7)
    lam, a, b = 0.2, 1.0, 4.0
    mean = lam * math.pi * (b * b - a * a)
    sets = [sample_ppp(lam, a, b, rng) for _ in range(10_000)]
    counts = np.array([len(s) for s in sets])
    assert abs(counts.mean() - mean) <= 3 * math.sqrt(mean / counts.size)
    r = np.concatenate([s.radii for s in sets[:2000]])
    ks = stats.kstest(r, lambda x: (x * x - a * a) / (b * b - a * a))
    assert ks.pvalue > 0.01


def test_estimate_fields():
    e = McEstimate.from_counts(25, 100, 3)
    assert e.p_hat == 0.25 and e.std_err == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
    assert e.within(0.25 + 2.9 * e.std_err) and not e.within(0.25 + 3.1 * e.std_err)
    assert McEstimate.from_counts(10, 10, 0).within(1.0)


def test_block_streams_are_distinct():
    a = block_rng(5, 0, 0).random(4)
    assert not np.array_equal(a, block_rng(5, 1, 0).random(4))
    assert not np.array_equal(a, block_rng(5, 0, 1).random(4))
    assert np.array_equal(a, block_rng(5, 0, 0).random(4))


def test_truncation_helpers():
    rt = truncation_radius([(1.0, 1.0, 2.0)], 4.0, 0.5)
    assert rt > 0.5
    # tail standard deviation at rt is 1e-4 of the mean beyond rho
    m_near = 2 * math.pi * 0.5 ** -2 / 2
    sd = math.sqrt(math.pi * 2.0 * rt ** -6 / 3)
    assert sd == pytest.approx(1e-4 * m_near, rel=1e-9)
    assert tail_mean(1.0, 1.0, 2.0, 4.0) == pytest.approx(2 * math.pi * 0.25 / 2)


def test_reproducible_and_thread_invariant():
    scn = nearest_rayleigh_scenario(M=2)
    a = mc_coverage_multi(scn, [0.5, 2.0], 3 * BLOCK + 17, seed=42, workers=1)
    b = mc_coverage_multi(scn, [0.5, 2.0], 3 * BLOCK + 17, seed=42, workers=4)
    assert a == b
    c = mc_coverage_multi(scn, [0.5, 2.0], 3 * BLOCK + 17, seed=43, workers=1)
    assert a != c


def test_thread_env(monkeypatch):
    scn = nearest_rayleigh_scenario(M=1)
    a = mc_coverage_general(scn, 1.0, 5000, 9)
    monkeypatch.setenv("TOEPCOV_THREADS", "3")
    assert mc_coverage_general(scn, 1.0, 5000, 9) == a


def test_small_gamma_always_covered():
    est = mc_coverage_general(nearest_rayleigh_scenario(M=1), 1e-12, 2000, 0)
    assert est.p_hat == 1.0


def test_no_interferers_no_noise_is_covered():
    scn = Scenario(GammaGain(1, 1.0), 4.0, (InterfererClass(0.0, RadiusSpec(1.0), RadiusSpec(2.0), GammaLaw(1, 1)),),
                   ServingDistance("fixed", r0=1.0))
    assert mc_coverage_general(scn, 5.0, 500, 0).p_hat == 1.0


def test_trials_validation():
    with pytest.raises(DomainError):
        mc_coverage_general(nearest_rayleigh_scenario(), 1.0, 0, 0)
    with pytest.raises(DomainError):
        mc_coverage_general(nearest_rayleigh_scenario(), 1.0, 100, 0, truncation_scale=0.5)


def test_rayleigh_quick():
    est = mc_coverage_multi(nearest_rayleigh_scenario(M=1), [0.1, 1.0, 10.0], 40_000, 5)
    for e, g in zip(est, (0.1, 1.0, 10.0)):
        assert e.within(rayleigh_baseline(g))


def test_noise_and_fixed_distance_quick():
    scn = Scenario(GammaGain(3, 0.5), 3.5,
                   (InterfererClass(0.05, RadiusSpec(2.0), RadiusSpec(math.inf), GammaLaw(2.0, 1.0)),),
                   ServingDistance("fixed", r0=1.0), noise_power=0.1)
    est = mc_coverage_general(scn, 0.8, 40_000, 11)
    assert est.within(coverage_theorem1(scn, 0.8).value)


def test_truncation_robust_general():
    scn = nearest_rayleigh_scenario(M=2)
    a = mc_coverage_general(scn, 1.0, 40_000, 3)
    b = mc_coverage_general(scn, 1.0, 40_000, 3, truncation_scale=2.0)
    assert abs(a.p_hat - b.p_hat) < 2 * a.std_err


def test_hetnet_quick():
    tiers = [TierParams(1e-4, 40.0, 1.0, 4, 2), TierParams(5e-4, 1.0, 2.0, 2, 1)]
    est = mc_hetnet_coverage(tiers, [1.0], 4.0, 20_000, 8)[0]
    assert est.within(hetnet_coverage(tiers, 1.0, 4.0).value)


def test_connection_outage_quick():
    co = mc_connection_outage(FIG1, [1e-9, 40.0], 20_000, 3)
    assert co[0].p_hat == 0.0
    assert co[1].within(connection_outage(FIG1, 40.0))


def test_connection_outage_zero_range():
    p = replace(FIG1, d0=0.0)
    est = mc_connection_outage(p, [1.0], 20_000, 4)[0]
    assert est.within(connection_outage(p, 1.0))


def test_secrecy_outage_quick():
    assert mc_secrecy_outage(replace(FIG1, lambda_e=0.0), [0.5], 1000, 1)[0].p_hat == 0.0
    so = mc_secrecy_outage(FIG1, [0.5, 1e9], 20_000, 2)
    assert so[0].p_hat <= secrecy_outage_ub(FIG1, 0.5) + 3 * so[0].std_err
    assert so[1].p_hat == 0.0
    assert eavesdropper_radius(replace(FIG1, lambda_e=1e-12), 0.5) == 0.0


def test_mmwave_nt1_matches_theorem1():
    p = MmWaveParams(lambda_t=1e-3, R=200.0, Nt=1, M=2, alpha=2.1, gamma=1.0)
    est = mc_mmwave_coverage(p, "cosine", 20_000, 6)
    assert est.within(mmwave_coverage_exact(p))


def test_mmwave_dense_los():
    p = MmWaveParams(lambda_t=1e-2, R=200.0, Nt=64, M=1, alpha=2.1, gamma=1e-9)
    assert mc_mmwave_coverage(p, "cosine", 2000, 1).p_hat == 1.0
    sparse = MmWaveParams(lambda_t=1e-6, R=200.0, Nt=64, M=1, alpha=2.1, gamma=1e-9)
    est = mc_mmwave_coverage(sparse, "actual", 20_000, 1)
    assert est.within(sparse.los_probability)
