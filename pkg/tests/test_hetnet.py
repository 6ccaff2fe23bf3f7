
import pytest

from toepcov import TierParams, hetnet_coverage, hetnet_coverage_numeric, hetnet_qki, rayleigh_baseline
from toepcov.exceptions import DomainError
from toepcov.hetnet import association_probability, hetnet_tier_terms

TWO_TIER = [TierParams(1e-4, 40.0, 1.0, 4, 2), TierParams(5e-4, 1.0, 2.0, 2, 1)]

# q_{k,i} from mpmath quadrature of the interference-derivative integral (r0 = 1)
SINGLE_TIER_Q1 = 0.64269908169872415
TWO_TIER_Q = {(0, 1): 0.000180760804042560541, (0, 2): 0.0000319524885809532920,
              (1, 1): 0.000808386891013368317, (1, 2): 0.000142895873034594706}
# Laplace exponent / pi at i = 0 (the display's diagonal adds -sum_j lam_j (P_j B_j / P_k B_k)^delta)
TWO_TIER_ETA0 = {0: -0.000230619908647626335, 1: -0.00103136358540176816}


def test_qki_single_tier():
    t = [TierParams(1.0, 1.0, 1.0, 1, 1)]
    assert hetnet_qki(t, 0, 1, 1.0, 4.0) == pytest.approx(SINGLE_TIER_Q1, rel=1e-12)


@pytest.mark.parametrize("k,i", sorted(TWO_TIER_Q))
def test_qki_two_tier(k, i):
    assert hetnet_qki(TWO_TIER, k, i, 1.0, 4.0) == pytest.approx(TWO_TIER_Q[(k, i)], rel=1e-10)


@pytest.mark.parametrize("k", [0, 1])
def test_qki_diagonal(k):
    tk = TWO_TIER[k]
    shift = sum(tj.lam * (tj.P * tj.B / (tk.P * tk.B)) ** 0.5 for tj in TWO_TIER)
    assert hetnet_qki(TWO_TIER, k, 0, 1.0, 4.0) == pytest.approx(TWO_TIER_ETA0[k] - shift, rel=1e-10)


def test_qki_small_gamma():
    for i in (1, 2, 3):
        assert abs(hetnet_qki(TWO_TIER, 0, i, 1e-12, 4.0)) < 1e-15


def test_single_tier_is_classic():
    t = [TierParams(1e-3, 1.0, 1.0, 1, 1)]
    assert hetnet_coverage(t, 1.0, 4.0).value == pytest.approx(rayleigh_baseline(1.0), abs=1e-10)
    assert hetnet_coverage(t, 1e-10, 4.0).value == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("gamma", [0.3, 3.0])
@pytest.mark.parametrize("ratio", [0.2, 5.0])
def test_closed_form_vs_quadrature(gamma, ratio):
    tiers = [TierParams(1e-4, 40.0, 1.0, 4, 2), TierParams(ratio * 1e-4, 1.0, 2.0, 2, 1)]
    a = hetnet_coverage(tiers, gamma, 4.0).value
    b = hetnet_coverage_numeric(tiers, gamma, 4.0).value
    assert a == pytest.approx(b, abs=1e-5)


def test_power_scaling_invariance():
    scaled = [TierParams(t.lam, 7.5 * t.P, t.B, t.Mant, t.U) for t in TWO_TIER]
    for k in (0, 1):
        for i in (0, 1, 2):
            assert hetnet_qki(scaled, k, i, 1.3, 3.5) == pytest.approx(hetnet_qki(TWO_TIER, k, i, 1.3, 3.5),
                                                                        rel=1e-12)
    assert hetnet_coverage(scaled, 1.3, 3.5).value == pytest.approx(hetnet_coverage(TWO_TIER, 1.3, 3.5).value)


def test_terms_in_unit_interval():
    terms = hetnet_tier_terms(TWO_TIER, 1.0, 4.0)
    assert all(0 <= t <= 1 for t in terms)
    assert 0 <= sum(terms) <= 1
    assert sum(association_probability(TWO_TIER, k, 4.0) for k in (0, 1)) == pytest.approx(1.0)
    # each tier term is bounded by that tier's association probability
    for k, t in enumerate(terms):
        assert t <= association_probability(TWO_TIER, k, 4.0) + 1e-12


def test_validation():
    with pytest.raises(DomainError):
        TierParams(1e-4, 1.0, 1.0, 2, 3)
    with pytest.raises(DomainError):
        TierParams(0.0, 1.0, 1.0, 2, 1)
    with pytest.raises(DomainError, match="path-loss exponent must exceed 2"):
        hetnet_coverage(TWO_TIER, 1.0, 2.0)
    with pytest.raises(DomainError):
        hetnet_coverage([], 1.0, 4.0)
    with pytest.raises(DomainError):
        hetnet_qki(TWO_TIER, 0, -1, 1.0, 4.0)
