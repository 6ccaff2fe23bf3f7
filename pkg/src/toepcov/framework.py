"""General coverage evaluator built on the Toeplitz exponential.

A :class:`Scenario` describes the signal gain (Gamma distributed), the
path loss, the noise floor, any number of Poisson interferer classes on
annuli around the receiver and the law of the serving distance. Its
:meth:`Scenario.q_column` returns the entries
``q_k = (-s)^k / k! * eta^(k)(s)`` of the Toeplitz matrix at a fixed
serving distance, and :func:`coverage_theorem1` averages
``l1_exp(Q(r))`` over the serving-distance law.

Noise enters the Laplace exponent as ``-s sigma^2``: it adds
``-s sigma^2`` to ``q_0`` and ``+s sigma^2`` to ``q_1`` and nothing to
higher entries. The default providers include these terms; a custom
``qk_provider`` must include them itself.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .exceptions import BracketError, DomainError, NumericError
from .specfun import binom_real, gauss_2f1, pochhammer
from .toeplitz import exp_first_column

log = logging.getLogger(__name__)

CLAMP_WARN = 1e-6
DEFAULT_ABS_TOL = 1e-7


# --------------------------------------------------------------------------
# gain laws


@dataclass(frozen=True)
class GammaGain:
    """Gamma(shape, scale) law of the signal channel gain."""

    shape: int
    scale: float = 1.0

    def __post_init__(self):
        if int(self.shape) != self.shape or self.shape < 1:
            raise DomainError(f"signal gain shape must be an integer >= 1, got {self.shape}")
        if not self.scale > 0:
            raise DomainError(f"signal gain scale must be positive, got {self.scale}")
        object.__setattr__(self, "shape", int(self.shape))


@dataclass(frozen=True)
class GammaLaw:
    """Interferer gain ``Gamma(shape, scale)``; ``Exp(1)`` is ``GammaLaw(1, 1)``."""

    shape: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError("interferer gain shape and scale must be positive")

    def mean(self) -> float:
        return self.shape * self.scale

    def second_moment(self) -> float:
        return self.shape * (self.shape + 1.0) * self.scale ** 2

    def sample(self, rng, size):
        if self.shape == 1.0:
            return rng.exponential(self.scale, size)
        return rng.gamma(self.shape, self.scale, size)


def gain_cosine(phi, n_antennas):
    """Cosine main-lobe pattern ``cos^2(pi N phi / 2)`` on ``|phi| <= 1/N``."""
    phi = np.asarray(phi, dtype=float)
    n = float(n_antennas)
    out = np.where(np.abs(phi) <= 1.0 / n, np.cos(0.5 * np.pi * n * phi) ** 2, 0.0)
    return out if out.ndim else float(out)


def gain_actual(phi, n_antennas, d_over_lambda=0.5):
    """Uniform-linear-array power gain (Fejer kernel), 1 at ``phi = 0``."""
    phi = np.asarray(phi, dtype=float)
    n = float(n_antennas)
    x = np.pi * d_over_lambda * phi
    sx = np.sin(x)
    # removable singularity where sin(x) = 0: |ratio| -> 1
    small = np.abs(sx) < 1e-12
    ratio = np.where(small, 1.0, np.sin(n * x) / np.where(small, 1.0, n * sx))
    out = np.clip(ratio ** 2, 0.0, 1.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PatternGammaLaw:
    """Interferer gain ``Gamma(shape, scale) * G(phi)`` with ``phi ~ U[-1, 1]``.

    ``pattern`` is ``"cosine"`` or ``"actual"``.
    """

    shape: float
    scale: float
    n_antennas: int
    pattern: str = "cosine"
    d_over_lambda: float = 0.5

    def __post_init__(self):
        if self.pattern not in ("cosine", "actual"):
            raise DomainError(f"unknown antenna pattern {self.pattern!r}")
        if self.n_antennas < 1:
            raise DomainError("n_antennas must be >= 1")
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError("interferer gain shape and scale must be positive")

    def pattern_gain(self, phi):
        if self.pattern == "cosine":
            return gain_cosine(phi, self.n_antennas)
        return gain_actual(phi, self.n_antennas, self.d_over_lambda)

    def _breakpoints(self):
        n = self.n_antennas
        if self.pattern == "cosine":
            return [1.0 / n]
        step = 1.0 / (n * self.d_over_lambda)
        return [j * step for j in range(1, int(1.0 / step) + 1) if j * step < 1.0]

    def _pattern_moment(self, power):
        if self.pattern == "cosine":
            # E[cos^(2p)] over the lobe, times the lobe probability 1/N
            return math.gamma(power + 0.5) / (math.sqrt(math.pi) * math.gamma(power + 1)) / self.n_antennas
        val, _ = integrate.quad(lambda p: self.pattern_gain(p) ** power, 0.0, 1.0,
                                points=self._breakpoints() or None, limit=400)
        return val

    def mean(self) -> float:
        return self.shape * self.scale * self._pattern_moment(1)

    def second_moment(self) -> float:
        return self.shape * (self.shape + 1.0) * self.scale ** 2 * self._pattern_moment(2)

    def sample(self, rng, size):
        g = rng.gamma(self.shape, self.scale, size)
        phi = rng.uniform(-1.0, 1.0, size)
        return g * self.pattern_gain(phi)


# --------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class RadiusSpec:
    """Annulus radius ``fixed + per_r0 * r0`` (metres); ``inf`` allowed."""

    fixed: float = 0.0
    per_r0: float = 0.0

    def __call__(self, r0: float) -> float:
        if math.isinf(self.fixed):
            return math.inf
        return self.fixed + self.per_r0 * r0

    @classmethod
    def parse(cls, value) -> "RadiusSpec":
        """Accept a number, ``"r0"``, ``"inf"``, ``{"r0": c}`` or ``{"fixed": a, "r0": c}``."""
        if isinstance(value, RadiusSpec):
            return value
        if isinstance(value, str):
            if value == "r0":
                return cls(0.0, 1.0)
            if value in ("inf", "infinity"):
                return cls(math.inf, 0.0)
            raise DomainError(f"unrecognised radius {value!r}")
        if isinstance(value, dict):
            return cls(float(value.get("fixed", 0.0)), float(value.get("r0", 0.0)))
        return cls(float(value), 0.0)


@dataclass(frozen=True)
class InterfererClass:
    """Poisson interferers of one type on the annulus ``[inner(r0), outer(r0)]``."""

    density: float
    inner: RadiusSpec = RadiusSpec(0.0, 1.0)
    outer: RadiusSpec = RadiusSpec(math.inf)
    gain: GammaLaw | PatternGammaLaw = GammaLaw(1.0, 1.0)

    def __post_init__(self):
        if not self.density >= 0:
            raise DomainError(f"interferer density must be >= 0, got {self.density}")
        object.__setattr__(self, "inner", RadiusSpec.parse(self.inner))
        object.__setattr__(self, "outer", RadiusSpec.parse(self.outer))

    def bounds(self, r0: float) -> tuple[float, float]:
        a, b = self.inner(r0), self.outer(r0)
        if a < 0 or b < a:
            raise DomainError(f"annulus [{a}, {b}] is not well ordered")
        return a, b


SERVING_MODELS = ("fixed", "nearest", "los_ball")


@dataclass(frozen=True)
class ServingDistance:
    """Law of the serving distance ``r0``.

    ``fixed`` uses ``r0``; ``nearest`` the nearest point of a PPP with
    density ``lambda_t``; ``los_ball`` the nearest point conditioned to lie
    within the LOS radius ``R``.
    """

    kind: str
    r0: float | None = None
    lambda_t: float | None = None
    R: float | None = None

    def __post_init__(self):
        if self.kind not in SERVING_MODELS:
            raise DomainError(f"unknown serving-distance model {self.kind!r}")
        if self.kind == "fixed" and not (self.r0 is not None and self.r0 > 0):
            raise DomainError("fixed serving distance needs r0 > 0")
        if self.kind in ("nearest", "los_ball") and not (self.lambda_t and self.lambda_t > 0):
            raise DomainError(f"{self.kind} serving distance needs lambda_t > 0")
        if self.kind == "los_ball" and not (self.R and self.R > 0):
            raise DomainError("los_ball serving distance needs R > 0")

    def pdf(self, r):
        return serving_distance_pdf(self.kind, self.lambda_t, self.R, r)

    def sample(self, rng, size):
        if self.kind == "fixed":
            return np.full(size, float(self.r0))
        lam = self.lambda_t
        if self.kind == "nearest":
            return np.sqrt(rng.exponential(1.0, size) / (math.pi * lam))
        # inverse cdf of the truncated nearest-point law
        mass = -math.expm1(-math.pi * lam * self.R ** 2)
        u = rng.uniform(0.0, 1.0, size)
        return np.sqrt(-np.log1p(-u * mass) / (math.pi * lam))

    def reference_radius(self) -> float:
        """Typical serving distance used for sizing simulation windows."""
        if self.kind == "fixed":
            return float(self.r0)
        return 0.5 / math.sqrt(self.lambda_t)


def serving_distance_pdf(model: str, lambda_t: float | None, R: float | None, r):
    """Density of the serving distance at ``r`` (1/m)."""
    if model == "fixed":
        raise DomainError("a fixed serving distance is a point mass; the caller handles it")
    if model not in SERVING_MODELS:
        raise DomainError(f"unknown serving-distance model {model!r}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("serving distance must be non-negative")
    lam = float(lambda_t)
    dens = 2.0 * math.pi * lam * r * np.exp(-math.pi * lam * r ** 2)
    if model == "los_ball":
        mass = -math.expm1(-math.pi * lam * R ** 2)
        dens = np.where(r <= R, dens / mass, 0.0)
    return dens if dens.ndim else float(dens)


# --------------------------------------------------------------------------
# Laplace-exponent entries


def _tail_column(m, a, density, shape, c, alpha):
    """Entries contributed by interferers on ``[a, inf)``; ``c = s * gain scale``."""
    delta = 2.0 / alpha
    out = np.zeros(m)
    if density == 0.0 or c == 0.0:
        return out
    if a == 0.0:
        # full plane: eta = -pi lam Gamma(1-delta) c^delta E[h^delta]
        eta = (-math.pi * density * math.gamma(1.0 - delta) * c ** delta
               * math.exp(math.lgamma(shape + delta) - math.lgamma(shape)))
        for k in range(m):
            out[k] = eta * (-1.0) ** k * binom_real(delta, k)
        return out
    if math.isinf(a):
        return out
    Z = c * a ** (-alpha)
    base = math.pi * density * a * a
    out[0] = base * (1.0 - gauss_2f1(-delta, shape, 1.0 - delta, -Z))
    logz = math.log(Z)
    for k in range(1, m):
        f = gauss_2f1(k - delta, shape + k, k + 1.0 - delta, -Z)
        coef = pochhammer(shape, k) / math.factorial(k) * delta / (k - delta)
        out[k] = base * coef * math.exp(k * logz + math.log(f)) if f > 0 else 0.0
    return out


def gamma_law_column(m, density, inner, outer, shape, c, alpha):
    """Column ``q_0..q_{m-1}`` for Gamma(shape, .) interferers on ``[inner, outer]``.

    ``c`` is ``s`` times the gain scale, so ``Z = c * r^(-alpha)`` is the
    normalised interference-to-signal argument at radius ``r``.
    """
    col = _tail_column(m, inner, density, shape, c, alpha)
    if not math.isinf(outer):
        col = col - _tail_column(m, outer, density, shape, c, alpha)
    return col


def class_column(cls: InterfererClass, m, r0, s, alpha):
    """Entries contributed by one interferer class at serving distance ``r0``."""
    a, b = cls.bounds(r0)
    gain = cls.gain
    if isinstance(gain, GammaLaw):
        return gamma_law_column(m, cls.density, a, b, gain.shape, s * gain.scale, alpha)
    # average the Gamma-law column over the beam direction
    c = s * gain.scale

    def integrand(phi):
        g = gain.pattern_gain(phi)
        if g <= 0.0:
            return np.zeros(m)
        return gamma_law_column(m, cls.density, a, b, gain.shape, c * g, alpha)

    val, err = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-10,
                                  points=gain._breakpoints() or None, limit=400)
    return val


QkProvider = Callable[[int, float, float], float]


@dataclass(frozen=True)
class Scenario:
    """One network model: signal law, path loss, noise, interferers, serving law."""

    signal_gain: GammaGain
    alpha: float
    interferers: tuple[InterfererClass, ...]
    serving: ServingDistance
    noise_power: float = 0.0
    qk_provider: QkProvider | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.alpha > 2:
            raise DomainError("path-loss exponent must exceed 2")
        if self.noise_power < 0:
            raise DomainError("noise power must be non-negative")
        object.__setattr__(self, "interferers", tuple(self.interferers))

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def M(self) -> int:
        return self.signal_gain.shape

    def s_value(self, r0: float, gamma: float) -> float:
        return gamma * r0 ** self.alpha / self.signal_gain.scale

    def q_column(self, r0: float, gamma: float) -> np.ndarray:
        """``(q_0, ..., q_{M-1})`` at serving distance ``r0`` and threshold ``gamma``."""
        m = self.M
        if self.qk_provider is not None:
            return np.array([self.qk_provider(k, r0, gamma) for k in range(m)], dtype=float)
        s = self.s_value(r0, gamma)
        col = np.zeros(m)
        for cls in self.interferers:
            col += class_column(cls, m, r0, s, self.alpha)
        if self.noise_power:
            col[0] -= s * self.noise_power
            if m > 1:
                col[1] += s * self.noise_power
        return col

    def qk(self, k: int, r0: float, gamma: float) -> float:
        return float(self.q_column(r0, gamma)[k])


def laplace_exponent_quadrature(scn: Scenario, r0: float, s: float) -> float:
    """``eta(s)`` by direct numerical integration of the PGFL exponent.

    Independent of the hypergeometric closed forms; used as a cross-check.
    """
    total = -s * scn.noise_power
    for cls in scn.interferers:
        a, b = cls.bounds(r0)
        gain = cls.gain

        def one_minus_laplace(v, gain=gain):
            w = s * v ** (-scn.alpha)
            if isinstance(gain, GammaLaw):
                return -math.expm1(-gain.shape * math.log1p(w * gain.scale))

            def inner(phi):
                g = gain.pattern_gain(phi)
                return -math.expm1(-gain.shape * math.log1p(w * gain.scale * g))

            val, _ = integrate.quad(inner, 0.0, 1.0, points=gain._breakpoints() or None,
                                    limit=200, epsabs=1e-14, epsrel=1e-12)
            return val

        val, _ = integrate.quad(lambda v: one_minus_laplace(v) * v, a, b, limit=400,
                                epsabs=1e-13, epsrel=1e-11)
        total -= 2.0 * math.pi * cls.density * val
    return total


# --------------------------------------------------------------------------
# numerics


def adaptive_quadrature(f, a: float, b: float, abs_tol: float = DEFAULT_ABS_TOL,
                        points: Sequence[float] | None = None, limit: int = 200):
    """Integrate ``f`` over ``[a, b]`` (``b`` may be ``inf``) to ``abs_tol``.

    Returns ``(value, err)``. Raises :class:`NumericError` when the
    subdivision limit is hit with an error estimate above ``abs_tol``.
    """
    if not abs_tol > 0:
        raise DomainError("abs_tol must be positive")
    kwargs = dict(epsabs=abs_tol, epsrel=0.0, limit=limit, full_output=1)
    if points is not None and math.isfinite(b):
        kwargs["points"] = list(points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(f, a, b, **kwargs)
    value, err = out[0], out[1]
    # QUADPACK appends a message only when ier != 0
    failed = len(out) > 3
    if not math.isfinite(value):
        raise NumericError(f"integral over [{a}, {b}] is not finite", achieved=err)
    if failed and err > abs_tol:
        raise NumericError(f"quadrature over [{a}, {b}] reached only {err:.3g} "
                           f"(target {abs_tol:.3g})", achieved=err)
    return value, err


def solve_threshold(f: Callable[[float], float], target: float, bracket, rtol: float = 1e-9):
    """Root of ``f(x) = target`` inside ``bracket`` for monotone ``f``."""
    lo, hi = float(bracket[0]), float(bracket[1])
    g_lo = f(lo) - target
    g_hi = f(hi) - target
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if np.sign(g_lo) == np.sign(g_hi):
        raise BracketError(f"f - target has the same sign at {lo} ({g_lo:.3g}) and {hi} ({g_hi:.3g})")
    return optimize.brentq(lambda x: f(x) - target, lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)


def find_bracket(f, target, lo, hi, factor=4.0, max_expand=60):
    """Widen ``[lo, hi]`` geometrically until ``f - target`` changes sign."""
    for _ in range(max_expand):
        if np.sign(f(lo) - target) != np.sign(f(hi) - target):
            return lo, hi
        lo /= factor
        hi *= factor
    raise BracketError(f"could not bracket target {target}")


# --------------------------------------------------------------------------
# coverage


RESULT_METHODS = ("analytic", "monte_carlo", "bound_lower", "bound_upper")


@dataclass(frozen=True)
class CoverageResult:
    """A probability with its provenance tag and error estimate."""

    value: float
    method: str = "analytic"
    abs_error: float = 0.0
    warning: str | None = None

    def __post_init__(self):
        if self.method not in RESULT_METHODS:
            raise DomainError(f"unknown method tag {self.method!r}")
        if not 0.0 <= self.value <= 1.0:
            raise DomainError(f"probability out of range: {self.value}")
        if not self.abs_error >= 0:
            raise DomainError("abs_error must be non-negative")


def clamp_probability(value, abs_error=0.0, method="analytic", warning=None):
    """Clamp to [0, 1]; flag if the excursion exceeds 1e-6."""
    clamped = min(max(value, 0.0), 1.0)
    excess = abs(clamped - value)
    if excess > CLAMP_WARN:
        msg = f"clamped {value:.9g} to [0, 1]"
        log.warning(msg)
        warning = msg if warning is None else f"{warning}; {msg}"
    return CoverageResult(clamped, method, abs_error, warning)


def _series_sum(scn, r, gamma, flags):
    x = exp_first_column(scn.q_column(r, gamma))
    if x.min() < -1e-12 * max(1.0, abs(x[0])):
        flags.add("negative series term")
    return float(x.sum())


def coverage_theorem1(scn: Scenario, gamma: float, abs_tol: float = DEFAULT_ABS_TOL) -> CoverageResult:
    """Coverage ``P(SINR > gamma)`` as the serving-distance average of
    ``l1_exp(Q_M(r))``."""
    if not gamma > 0:
        raise DomainError("threshold gamma must be positive")
    flags: set[str] = set()
    serving = scn.serving
    if serving.kind == "fixed":
        value, err = _series_sum(scn, serving.r0, gamma, flags), 0.0
    else:
        lam = serving.lambda_t
        # u = pi lam r^2 turns the nearest-point density into e^{-u}
        def integrand(u):
            r = math.sqrt(u / (math.pi * lam))
            return math.exp(-u) * _series_sum(scn, r, gamma, flags)

        if serving.kind == "nearest":
            value, err = adaptive_quadrature(integrand, 0.0, math.inf, abs_tol)
        else:
            umax = math.pi * lam * serving.R ** 2
            mass = -math.expm1(-umax)
            value, err = adaptive_quadrature(integrand, 0.0, umax, abs_tol * mass)
            value, err = value / mass, err / mass
    warning = "; ".join(sorted(flags)) or None
    return clamp_probability(value, err, "analytic", warning)


def coverage_direct_m1(scn: Scenario, gamma: float, abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """Single-antenna path ``E_r[L(s)]`` with ``eta`` from direct quadrature.

    Only meaningful for ``M = 1``; serves as the reference the Toeplitz
    path must reduce to.
    """
    if scn.M != 1:
        raise DomainError("direct single-antenna path needs M = 1")

    def lt(r):
        return math.exp(laplace_exponent_quadrature(scn, r, scn.s_value(r, gamma)))

    serving = scn.serving
    if serving.kind == "fixed":
        return lt(serving.r0)
    lam = serving.lambda_t

    def integrand(u):
        return math.exp(-u) * lt(math.sqrt(u / (math.pi * lam)))

    if serving.kind == "nearest":
        return adaptive_quadrature(integrand, 0.0, math.inf, abs_tol)[0]
    umax = math.pi * lam * serving.R ** 2
    return adaptive_quadrature(integrand, 0.0, umax, abs_tol)[0] / -math.expm1(-umax)


def rayleigh_baseline(gamma: float, alpha: float = 4.0) -> float:
    """Interference-limited single-antenna Rayleigh coverage with nearest-point association.

    ``1 / (1 + rho)`` with ``rho = gamma^delta int_{gamma^-delta}^inf du / (1 + u^(alpha/2))``.
    For ``alpha = 4`` this is ``1/(1 + sqrt(g)(pi/2 - arctan(1/sqrt(g))))``.
    """
    if alpha == 4.0:
        sg = math.sqrt(gamma)
        return 1.0 / (1.0 + sg * (math.pi / 2.0 - math.atan(1.0 / sg)))
    delta = 2.0 / alpha
    val, _ = integrate.quad(lambda u: 1.0 / (1.0 + u ** (alpha / 2.0)), gamma ** (-delta), math.inf)
    return 1.0 / (1.0 + gamma ** delta * val)


def nearest_rayleigh_scenario(M: int = 1, theta: float = 1.0, alpha: float = 4.0,
                              lambda_t: float = 1.0, noise_power: float = 0.0,
                              interferer_gain=None) -> Scenario:
    """Single-tier cellular model: nearest-point serving, interferers beyond ``r0``."""
    gain = interferer_gain or GammaLaw(1.0, 1.0)
    return Scenario(
        signal_gain=GammaGain(M, theta),
        alpha=alpha,
        interferers=(InterfererClass(lambda_t, RadiusSpec(0.0, 1.0), RadiusSpec(math.inf), gain),),
        serving=ServingDistance("nearest", lambda_t=lambda_t),
        noise_power=noise_power,
    )
