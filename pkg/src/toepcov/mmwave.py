"""Directional arrays in LOS-ball mmWave cellular networks.

Users attach to the nearest LOS base station; LOS base stations form a
PPP of density ``lambda_t`` inside the LOS radius ``R`` (NLOS links are
ignored). The signal gain is Nakagami ``Gamma(M, 1/M)``; an interferer
adds an independent array gain ``G(phi)`` with ``phi ~ U[-1, 1]``.

With the cosine pattern the Laplace exponent is exactly linear in
``t = 1/Nt``; averaging its entries over the serving distance gives the
``q_hat_k`` and the lower bound on coverage (a user without any LOS base
station counts as uncovered).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .framework import (
    CoverageResult,
    GammaGain,
    InterfererClass,
    PatternGammaLaw,
    RadiusSpec,
    Scenario,
    ServingDistance,
    adaptive_quadrature,
    clamp_probability,
    coverage_theorem1,
    gain_actual,
    gain_cosine,
)
from .specfun import hyp_3f2
from .toeplitz import nilpotent_power_l1

INNER_ABS_TOL = 1e-8


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class MmWaveParams:
    lambda_t: float
    R: float
    Nt: int
    M: int
    alpha: float
    gamma: float
    d_over_lambda: float = 0.5

    def __post_init__(self):
        if not self.lambda_t > 0:
            raise DomainError("lambda_t must be positive")
        if not self.R > 0:
            raise DomainError("LOS radius R must be positive")
        if int(self.Nt) != self.Nt or self.Nt < 1:
            raise DomainError("Nt must be an integer >= 1")
        if int(self.M) != self.M or self.M < 1:
            raise DomainError("M must be an integer >= 1")
        if not self.alpha > 2:
            raise DomainError("path-loss exponent must exceed 2")
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        object.__setattr__(self, "Nt", int(self.Nt))
        object.__setattr__(self, "M", int(self.M))

    @classmethod
    def from_db(cls, gamma_db: float, **kw) -> "MmWaveParams":
        return cls(gamma=db_to_linear(gamma_db), **kw)

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def t(self) -> float:
        return 1.0 / self.Nt

    @property
    def los_load(self) -> float:
        """``pi lambda_t R^2``, mean number of LOS base stations."""
        return math.pi * self.lambda_t * self.R ** 2

    @property
    def los_probability(self) -> float:
        """``1 - exp(-pi lambda_t R^2)``: at least one LOS base station."""
        return -math.expm1(-self.los_load)


def mmwave_J(k: int, x: float, M: int, delta: float) -> float:
    """``3F2(k+1/2, k-delta, k+M; k+1, k+1-delta; x)`` for ``x <= 0``."""
    if x > 0:
        raise DomainError("mmwave_J is defined here for x <= 0")
    return hyp_3f2(k + 0.5, k - delta, k + M, k + 1.0, k + 1.0 - delta, x)


def mmwave_y(k: int, x: float, lambda_t: float, R: float, M: int, delta: float) -> float:
    load = math.pi * lambda_t * R * R
    # 1 - e^{-L}(1+L) and L - 1 + e^{-L}, cancellation-free for small L
    em1 = math.expm1(-load)
    head = -em1 - load * math.exp(-load)
    out = mmwave_J(k, x, M, delta) * head
    if k == 0:
        out += load + em1
    return out


def _prefactor(k, p: MmWaveParams):
    lg = (math.lgamma(k + 0.5) + math.lgamma(p.M + k) - 2.0 * math.lgamma(k + 1.0)
          - math.lgamma(p.M) - 0.5 * math.log(math.pi))
    return 2.0 * math.exp(lg) * p.gamma ** k / (p.alpha * k - 2.0)


def mmwave_inner_integral(k: int, p: MmWaveParams) -> float:
    """``(pi lam)^2 R^(2 - alpha k) int_0^{R^2} e^{-pi lam r} r^(alpha k/2) J_k(-gamma r^(alpha/2)/R^alpha) dr``.

    Evaluated in the dimensionless variable ``v = pi lam r`` as
    ``L^(1 - alpha k/2) int_0^L e^{-v} v^(alpha k/2) J_k(-gamma (v/L)^(alpha/2)) dv``
    with ``L = pi lam R^2``.
    """
    L = p.los_load
    a2 = 0.5 * p.alpha
    e = a2 * k

    def f(v):
        if v == 0.0:
            return 0.0 if e > 0 else mmwave_J(k, 0.0, p.M, p.delta)
        return math.exp(-v + e * math.log(v)) * mmwave_J(k, -p.gamma * (v / L) ** a2, p.M, p.delta)

    val, _ = adaptive_quadrature(f, 0.0, L, INNER_ABS_TOL, limit=400)
    return L ** (1.0 - e) * val


def mmwave_qhat(k: int, p: MmWaveParams) -> float:
    """Serving-distance average of the ``t``-coefficient of ``q_k``.

    The closed form is used for every ``k >= 0``; at ``k = 0`` the leading
    factor equals -1 and the indicator term in ``y_0`` supplies the LOS-ball
    mass, so the same display gives the diagonal.
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    y = mmwave_y(k, -p.gamma, p.lambda_t, p.R, p.M, p.delta)
    return _prefactor(k, p) * (y - mmwave_inner_integral(k, p))


def qhat_column(p: MmWaveParams) -> np.ndarray:
    return np.array([mmwave_qhat(k, p) for k in range(p.M)])


def mmwave_betas(p: MmWaveParams) -> np.ndarray:
    """``beta_0 .. beta_{M-1}``; independent of ``Nt``."""
    col = qhat_column(p)
    P = p.los_probability
    betas = np.empty(p.M)
    betas[0] = col[0] / P
    for n in range(1, p.M):
        betas[n] = nilpotent_power_l1(col, n) / (math.factorial(n) * P)
    return betas


def bound_from_betas(betas, P: float, t: float) -> float:
    poly = 1.0 + sum(betas[n] * t ** n for n in range(1, len(betas)))
    return P * math.exp(betas[0] * t) * poly


def mmwave_coverage_lb(p: MmWaveParams, betas=None) -> CoverageResult:
    """Lower bound ``P e^{beta_0 t} (1 + sum beta_n t^n)`` on cosine-pattern coverage."""
    if betas is None:
        betas = mmwave_betas(p)
    return clamp_probability(bound_from_betas(betas, p.los_probability, p.t), method="bound_lower")


def mmwave_coverage_curve(p: MmWaveParams, nts) -> list[float]:
    """Bound over several array sizes, sharing the ``beta`` computation."""
    betas = mmwave_betas(p)
    return [bound_from_betas(betas, p.los_probability, 1.0 / n) for n in nts]


def mmwave_scenario(p: MmWaveParams, pattern: str = "cosine", noise_power: float = 0.0) -> Scenario:
    """General-framework form of the LOS-ball model (coverage conditioned on LOS)."""
    gain = PatternGammaLaw(float(p.M), 1.0 / p.M, p.Nt, pattern, p.d_over_lambda)
    return Scenario(
        signal_gain=GammaGain(p.M, 1.0 / p.M),
        alpha=p.alpha,
        interferers=(InterfererClass(p.lambda_t, RadiusSpec(0.0, 1.0), RadiusSpec(p.R), gain),),
        serving=ServingDistance("los_ball", lambda_t=p.lambda_t, R=p.R),
        noise_power=noise_power,
    )


def mmwave_coverage_exact(p: MmWaveParams, pattern: str = "cosine") -> float:
    """Unconditional coverage by the Theorem-1 quadrature (no bound)."""
    res = coverage_theorem1(mmwave_scenario(p, pattern), p.gamma)
    return p.los_probability * res.value


__all__ = [
    "MmWaveParams",
    "db_to_linear",
    "gain_actual",
    "gain_cosine",
    "mmwave_J",
    "mmwave_y",
    "mmwave_qhat",
    "mmwave_inner_integral",
    "qhat_column",
    "mmwave_betas",
    "mmwave_coverage_lb",
    "mmwave_coverage_curve",
    "mmwave_scenario",
    "mmwave_coverage_exact",
]
