"""K-tier multiuser MIMO HetNets with SDMA.

Tier ``j`` has BS density ``lam``, transmit power ``P``, association bias
``B``, ``Mant`` antennas and serves ``U`` users with equal power per
user. A user joins the tier maximising ``P_j B_j r_j^-alpha``. The signal
gain in tier ``k`` is ``Gamma(Mant_k - U_k + 1, 1)`` and tier-``j``
interferers carry ``Gamma(U_j, 1)``.

Closed form: with ``u = r^2`` the Toeplitz entries of tier ``k`` are
linear in ``u`` and the association-weighted serving density is
``pi lam_k exp(-c_k u)``, so

    p_k = int pi lam_k e^{-c_k u} l1(exp(u Qt_k)) du = l1((c_k I - Qt_k)^{-1} pi lam_k)

which is the column sum of the inverse of a Toeplitz matrix whose first
column is ``-q_{k,i} / lam_k`` with ``q_{k,i}`` the per-tier display
formula (``i = 0`` included).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DomainError, SingularMatrixError
from .framework import (
    CoverageResult,
    GammaGain,
    GammaLaw,
    InterfererClass,
    RadiusSpec,
    Scenario,
    ServingDistance,
    clamp_probability,
    coverage_theorem1,
)
from .specfun import gauss_2f1, ln_gamma
from .toeplitz import inv_first_column


@dataclass(frozen=True)
class TierParams:
    lam: float
    P: float
    B: float
    Mant: int
    U: int

    def __post_init__(self):
        if not (self.lam > 0 and self.P > 0 and self.B > 0):
            raise DomainError("tier density, power and bias must be positive")
        if int(self.Mant) != self.Mant or int(self.U) != self.U or self.U < 1:
            raise DomainError("Mant and U must be positive integers")
        if self.U > self.Mant:
            raise DomainError(f"U ({self.U}) must not exceed Mant ({self.Mant})")

    @property
    def signal_shape(self) -> int:
        return int(self.Mant) - int(self.U) + 1


def _check(tiers, alpha):
    if not tiers:
        raise DomainError("at least one tier is required")
    if not alpha > 2:
        raise DomainError("path-loss exponent must exceed 2")


def hetnet_qki(tiers: Sequence[TierParams], k: int, i: int, gamma: float, alpha: float) -> float:
    """Entry ``q_{k,i}`` of the per-tier display formula.

    ``k`` is a 0-based tier index. For ``i >= 1`` this is the printed
    formula; ``i = 0`` evaluates the same expression (``delta/(i-delta) =
    -1``, ``Gamma`` ratio 1), which is the diagonal needed by the closed
    form.
    """
    _check(tiers, alpha)
    if i < 0:
        raise DomainError("i must be non-negative")
    delta = 2.0 / alpha
    if i == delta:
        raise DomainError("i coincides with the pole at delta")
    tk = tiers[k]
    pbk = tk.P * tk.B
    total = 0.0
    for tj in tiers:
        pbj = tj.P * tj.B
        arg = tk.U * tk.B * gamma / (tj.U * tj.B)
        ratio = math.exp(ln_gamma(tj.U + i) - ln_gamma(tj.U) - ln_gamma(i + 1.0))
        f = gauss_2f1(i - delta, tj.U + i, i + 1.0 - delta, -arg)
        total += tj.lam * (pbj / pbk) ** delta * ratio * delta / (i - delta) * arg ** i * f
    return total


def hetnet_column(tiers: Sequence[TierParams], k: int, gamma: float, alpha: float) -> np.ndarray:
    """First column whose inverse column-sum is the tier-``k`` coverage term."""
    m = tiers[k].signal_shape
    lam_k = tiers[k].lam
    return np.array([-hetnet_qki(tiers, k, i, gamma, alpha) / lam_k for i in range(m)])


def hetnet_tier_terms(tiers, gamma, alpha) -> list[float]:
    """Per-tier coverage contributions of the closed form."""
    _check(tiers, alpha)
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    terms = []
    for k in range(len(tiers)):
        col = hetnet_column(tiers, k, gamma, alpha)
        if col[0] == 0.0:
            raise SingularMatrixError(f"tier {k}: zero diagonal")
        terms.append(float(np.sum(inv_first_column(col))))
    return terms


def hetnet_coverage(tiers: Sequence[TierParams], gamma: float, alpha: float) -> CoverageResult:
    """Closed-form coverage ``sum_k l1(Q_k^{-1})`` (interference limited)."""
    return clamp_probability(sum(hetnet_tier_terms(tiers, gamma, alpha)))


def association_probability(tiers, k, alpha) -> float:
    delta = 2.0 / alpha
    tk = tiers[k]
    c = sum(tj.lam * (tj.P * tj.B / (tk.P * tk.B)) ** delta for tj in tiers)
    return tk.lam / c


def tier_scenario(tiers, k, alpha, noise_power=0.0) -> Scenario:
    """General-framework scenario of a user associated with tier ``k``.

    Serving distance is the association-conditioned nearest-point law
    (effective density ``c_k / pi``); tier-``j`` interferers lie beyond
    ``(P_j B_j / P_k B_k)^(1/alpha) r0``.
    """
    delta = 2.0 / alpha
    tk = tiers[k]
    pbk = tk.P * tk.B
    classes = []
    for tj in tiers:
        factor = (tj.P * tj.B / pbk) ** (1.0 / alpha)
        classes.append(InterfererClass(tj.lam, RadiusSpec(0.0, factor), RadiusSpec(math.inf),
                                       GammaLaw(float(tj.U), tj.P / tj.U)))
    lam_eff = sum(tj.lam * (tj.P * tj.B / pbk) ** delta for tj in tiers)
    return Scenario(
        signal_gain=GammaGain(tk.signal_shape, tk.P / tk.U),
        alpha=alpha,
        interferers=tuple(classes),
        serving=ServingDistance("nearest", lambda_t=lam_eff),
        noise_power=noise_power,
    )


def hetnet_coverage_numeric(tiers, gamma, alpha, noise_power=0.0) -> CoverageResult:
    """Coverage by per-tier quadrature of the Toeplitz exponential."""
    _check(tiers, alpha)
    total = 0.0
    err = 0.0
    for k in range(len(tiers)):
        res = coverage_theorem1(tier_scenario(tiers, k, alpha, noise_power), gamma)
        a = association_probability(tiers, k, alpha)
        total += a * res.value
        err += a * res.abs_error
    return clamp_probability(total, err)
