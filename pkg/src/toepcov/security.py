"""Secrecy metrics for ad hoc networks with joint jamming and interference nulling.

Legitimate transmitters form a PPP of density ``lambda_t``; each has
``Nt`` antennas and a receiver at distance ``r0``. Receivers ask every
interfering transmitter within the coordination range ``d0`` to null
toward them; a transmitter serves at most ``Nt - 1`` such requests and
spends the remaining ``N_x = Nt - min(K_x, Nt - 1)`` streams on its own
message plus jamming. Eavesdroppers form an independent PPP of density
``lambda_e``. Transmit power is normalised to 1 (SIR metrics only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from scipy import stats

from .exceptions import DomainError
from .framework import find_bracket, gamma_law_column, solve_threshold
from .specfun import binom_real, gauss_2f1, ln_gamma
from .toeplitz import l1_exp

# below this d0 the coordination disc is treated as empty
D0_EPS = 1e-9


@dataclass(frozen=True)
class SecurityParams:
    lambda_t: float
    lambda_e: float
    Nt: int
    r0: float
    d0: float
    alpha: float

    def __post_init__(self):
        if self.lambda_t < 0 or self.lambda_e < 0:
            raise DomainError("densities must be non-negative")
        if int(self.Nt) != self.Nt or self.Nt < 1:
            raise DomainError("Nt must be an integer >= 1")
        if not self.r0 > 0:
            raise DomainError("r0 must be positive")
        if self.d0 < 0:
            raise DomainError("d0 must be non-negative")
        if not self.alpha > 2:
            raise DomainError("path-loss exponent must exceed 2")
        object.__setattr__(self, "Nt", int(self.Nt))

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def coordination_load(self) -> float:
        """Mean number of requests ``pi d0^2 lambda_t``."""
        return math.pi * self.d0 ** 2 * self.lambda_t


def p_requests(n: int, p: SecurityParams) -> float:
    """Probability that a transmitter sends ``n`` streams.

    Truncated Poisson: ``K ~ Poisson(pi d0^2 lambda_t)`` requests, ``n =
    Nt - K`` for ``n >= 2`` and the remaining mass at ``n = 1``.
    """
    if not 1 <= n <= p.Nt:
        raise DomainError(f"n must lie in [1, {p.Nt}], got {n}")
    return float(request_pmf(p)[n - 1])


def request_pmf(p: SecurityParams) -> np.ndarray:
    """``p_N(1), ..., p_N(Nt)`` as an array."""
    x = p.coordination_load
    out = np.zeros(p.Nt)
    for n in range(2, p.Nt + 1):
        k = p.Nt - n
        out[n - 1] = math.exp(k * math.log(x) - x - math.lgamma(k + 1)) if x > 0 else float(k == 0)
    out[0] = 1.0 - out[1:].sum()
    return out


def security_qk(k: int, Nx0: int, p: SecurityParams, gamma_l: float) -> float:
    """Entry ``q_k`` of the connection-outage Toeplitz matrix (``d0 > 0``).

    The printed summation; at ``k = 0`` the same expression gives the
    diagonal (``Gamma`` ratio and ``delta/(delta-k)`` both 1).
    """
    if p.d0 <= 0:
        raise DomainError("security_qk needs d0 > 0; use the no-nulling path for d0 = 0")
    if k < 0:
        raise DomainError("k must be non-negative")
    delta = p.delta
    pmf = request_pmf(p)
    ratio_a = (p.r0 / p.d0) ** p.alpha * gamma_l * Nx0
    total = 0.0
    for n in range(1, p.Nt + 1):
        if pmf[n - 1] == 0.0:
            continue
        arg = ratio_a / n
        f = gauss_2f1(k - delta, k + n, k + 1.0 - delta, -arg)
        if k == 0:
            term = f
        else:
            gam = math.exp(ln_gamma(n + k) - ln_gamma(n) - ln_gamma(k + 1.0))
            term = gam * delta / (delta - k) * math.exp(k * math.log(arg)) * f
        total += pmf[n - 1] * term
    return total


def unselected_density(p: SecurityParams) -> float:
    """Density of transmitters within ``d0`` that do not null toward the receiver.

    A transmitter inside the coordination range holds ``K = 1 + Poisson(pi
    d0^2 lambda_t)`` requests (ours plus the others) and serves ``Nt - 1``
    of them uniformly, so it skips us with probability ``(1 - (Nt-1)/K)^+``.
    Such a transmitter sends a single stream, hence ``Exp(1)`` gain.
    """
    load = p.coordination_load
    if load == 0.0 or p.lambda_t == 0.0:
        return 0.0
    kmax = int(load + 12.0 * math.sqrt(load) + 40) + p.Nt
    extra = np.arange(kmax + 1)
    K = extra + 1.0
    skip = np.clip(1.0 - (p.Nt - 1) / K, 0.0, None)
    return p.lambda_t * float(np.dot(stats.poisson.pmf(extra, load), skip))


def connection_column(Nx0: int, p: SecurityParams, gamma_l: float, inside: bool = True) -> np.ndarray:
    """First column of ``-pi lambda_t d0^2 (Q - I)`` for ``N_x0 = Nx0`` streams.

    With ``inside`` the unselected transmitters within ``d0`` are added as an
    ``Exp(1)`` class on ``[0, d0]``; without it the column is exactly the
    outside-``d0`` display.
    """
    if p.d0 <= D0_EPS:
        return _no_nulling_column(Nx0, p, gamma_l)
    scale = -p.coordination_load
    col = np.array([security_qk(k, Nx0, p, gamma_l) for k in range(Nx0)])
    col[0] -= 1.0
    col = scale * col
    if inside:
        s = gamma_l * p.r0 ** p.alpha * Nx0
        col = col + gamma_law_column(Nx0, unselected_density(p), 0.0, p.d0, 1.0, s, p.alpha)
    return col


def _no_nulling_column(Nx0, p, gamma_l):
    # full-plane Gamma(Nt, 1)/Nt interferers: eta(s) = -pi lam Gamma(1-delta) s^delta E[g^delta]
    delta = p.delta
    nt = p.Nt
    eta = (-math.pi * p.lambda_t * p.r0 ** 2 * (gamma_l * Nx0 / nt) ** delta * math.gamma(1.0 - delta)
           * math.exp(math.lgamma(nt + delta) - math.lgamma(nt)))
    return np.array([eta * (-1.0) ** k * binom_real(delta, k) for k in range(Nx0)])


def connection_outage(p: SecurityParams, gamma_l: float, inside: bool = True) -> float:
    """Connection outage ``1 - sum_N p_N(N) l1(exp(-pi lambda_t d0^2 (Q_N - I)))``.

    ``inside=False`` drops the unselected in-range interferers (see
    :func:`connection_column`).
    """
    if gamma_l <= 0:
        return 0.0
    if math.isinf(gamma_l):
        return 1.0
    pmf = request_pmf(p) if p.d0 > D0_EPS else np.eye(p.Nt)[-1]
    cover = 0.0
    for n in range(1, p.Nt + 1):
        w = pmf[n - 1]
        if w == 0.0:
            continue
        cover += w * l1_exp(connection_column(n, p, gamma_l, inside))
    return min(max(1.0 - cover, 0.0), 1.0)


def secrecy_outage_ub(p: SecurityParams, gamma_e: float) -> float:
    """Upper bound on the secrecy outage probability."""
    delta = p.delta
    if delta >= 1:
        raise DomainError("secrecy bound needs alpha > 2")
    if not gamma_e > 0:
        raise DomainError("gamma_e must be positive")
    if math.isinf(gamma_e) or p.lambda_e == 0:
        return 0.0
    pmf = request_pmf(p) if p.d0 > D0_EPS else np.eye(p.Nt)[-1]
    ns = np.arange(1, p.Nt + 1)
    denom = math.gamma(1.0 - delta) * sum(
        pmf[n - 1] * math.exp(math.lgamma(n + delta) - math.lgamma(n) - delta * math.log(n))
        for n in ns)
    keep = 0.0
    for n in ns:
        w = pmf[n - 1]
        if w == 0.0:
            continue
        expo = (p.lambda_e / p.lambda_t
                * math.exp((1 - n) * math.log1p(gamma_e) - delta * math.log(gamma_e) - delta * math.log(n))
                / denom)
        keep += w * math.exp(-expo)
    return min(max(1.0 - keep, 0.0), 1.0)


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    gamma_l: float | None
    gamma_e: float | None
    feasible: bool = True


def gamma_l_threshold(p: SecurityParams, mu: float, inside: bool = True) -> float:
    """SIR threshold where the connection outage equals ``mu``."""
    f = lambda g: connection_outage(p, g, inside)
    lo, hi = find_bracket(f, mu, 1e-3, 10.0)
    return _solve_log(f, mu, lo, hi)


def gamma_e_threshold(p: SecurityParams, eps: float) -> float:
    """SIR threshold where the secrecy outage bound equals ``eps``."""
    f = lambda g: secrecy_outage_ub(p, g)
    lo, hi = find_bracket(f, eps, 1e-3, 10.0)
    return _solve_log(f, eps, lo, hi)


def _solve_log(f, target, lo, hi):
    # search in log(gamma): thresholds span decades
    x = solve_threshold(lambda t: f(math.exp(t)), target, (math.log(lo), math.log(hi)), rtol=1e-12)
    return math.exp(x)


def secrecy_capacity(p: SecurityParams, d0: float | None = None, mu: float = 0.1,
                     eps: float = 0.01, inside: bool = True) -> CapacityResult:
    """Secrecy transmission capacity ``(1-mu) lambda_t [log2((1+g_l)/(1+g_e))]^+``."""
    if not (0 < mu < 1 and 0 < eps < 1):
        raise DomainError("mu and eps must lie in (0, 1)")
    if d0 is not None:
        p = replace(p, d0=d0)
    g_l = gamma_l_threshold(p, mu, inside)
    if p.lambda_e == 0:
        return CapacityResult((1 - mu) * p.lambda_t * math.log2(1 + g_l), g_l, 0.0)
    try:
        g_e = gamma_e_threshold(p, eps)
    except Exception:
        return CapacityResult(0.0, g_l, None, feasible=False)
    rate = (1 - mu) * p.lambda_t * max(math.log2((1 + g_l) / (1 + g_e)), 0.0)
    return CapacityResult(rate, g_l, g_e)


def optimize_d0(p: SecurityParams, mu: float, eps: float, grid,
                inside: bool = True) -> tuple[float, float]:
    """Grid search over ``d0`` then golden-section refinement around the best point.

    Ties go to the smallest ``d0``.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise DomainError("grid must not be empty")
    values = [secrecy_capacity(p, d, mu, eps, inside).capacity for d in grid]
    best = int(np.argmax(values))
    d_best, c_best = grid[best], values[best]
    if len(grid) < 3 or all(v == values[0] for v in values):
        return d_best, c_best
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    cap = lambda d: secrecy_capacity(p, d, mu, eps, inside).capacity
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = cap(c), cap(d)
    for _ in range(40):
        if b - a < 1e-4 * max(1.0, abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = cap(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = cap(d)
    for x, v in ((c, fc), (d, fd)):
        if v > c_best:
            d_best, c_best = x, v
    return d_best, c_best
