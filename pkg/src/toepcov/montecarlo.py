"""Monte Carlo oracle for the analytic results.

Every estimator simulates the network model directly: Poisson point
processes, per-link gain draws and the SINR test at the typical receiver
(origin). Trials are processed in fixed-size blocks; block ``b`` draws
from ``SeedSequence(seed, spawn_key=(b, stream))`` so results depend only
on ``(seed, trials)``, never on the worker count, and hit counts are
integers summed in block order.

Far-field truncation. Interferers on an unbounded annulus are simulated
up to a radius ``Rt`` and the remaining interference is replaced by its
exact mean ``2 pi lam E[g] Rt^(2-alpha) / (alpha-2)``. ``Rt`` is chosen
so that the standard deviation of the neglected part is below
``TRUNCATION_TOL`` times the mean interference beyond the reference
radius. Points are drawn shell by shell from separate streams, so
enlarging ``Rt`` (``truncation_scale``) only adds an outer shell and
keeps the inner draws fixed.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import DomainError
from .framework import GammaLaw, PatternGammaLaw, Scenario
from .hetnet import TierParams
from .mmwave import MmWaveParams
from .security import D0_EPS, SecurityParams

BLOCK = 4096
TRUNCATION_TOL = 1e-4
# cap on the mean number of simulated interferers per trial
MAX_POINTS = 20_000
THREADS_ENV = "TOEPCOV_THREADS"


@dataclass(frozen=True)
class PointSet:
    """Points (n x 2, metres) drawn on the annulus ``[a, b]`` around the origin."""

    points: np.ndarray
    a: float
    b: float

    def __len__(self):
        return len(self.points)

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    trials: int
    seed: int
    successes: int = 0

    @classmethod
    def from_counts(cls, successes: int, trials: int, seed: int) -> "McEstimate":
        p = successes / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials, seed, int(successes))

    def within(self, value: float, k: float = 3.0) -> bool:
        """``|p_hat - value| <= k sigma`` (one binomial count of slack when sigma = 0)."""
        return abs(self.p_hat - value) <= max(k * self.std_err, 1.0 / self.trials)


def block_rng(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(block, stream))))


def _workers(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else 1


def _run_blocks(fn: Callable[[int, int], np.ndarray], trials: int, workers=None) -> np.ndarray:
    """Sum ``fn(block, n)`` over blocks in block order."""
    if int(trials) != trials or trials < 1:
        raise DomainError("trials must be a positive integer")
    trials = int(trials)
    nblocks = -(-trials // BLOCK)
    sizes = [min(BLOCK, trials - b * BLOCK) for b in range(nblocks)]
    w = _workers(workers)
    if w == 1:
        parts = [fn(b, n) for b, n in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(w) as ex:
            parts = list(ex.map(fn, range(nblocks), sizes))
    total = np.zeros_like(parts[0])
    for part in parts:
        total = total + part
    return total


def sample_ppp(lam: float, a: float, b: float, rng: np.random.Generator) -> PointSet:
    """Homogeneous PPP of density ``lam`` on the annulus ``a <= r <= b``."""
    if not (0.0 <= a <= b < math.inf):
        raise DomainError("annulus must satisfy 0 <= a <= b < inf")
    if lam < 0:
        raise DomainError("density must be non-negative")
    n = rng.poisson(lam * math.pi * (b * b - a * a)) if lam > 0 else 0
    u = rng.random(n)
    r = np.sqrt(a * a + u * (b * b - a * a))
    th = rng.uniform(0.0, 2.0 * math.pi, n)
    return PointSet(np.column_stack((r * np.cos(th), r * np.sin(th))), a, b)


def truncation_radius(classes, alpha: float, rho: float, tol: float = TRUNCATION_TOL,
                      max_points: int = MAX_POINTS) -> float:
    """Radius beyond which the interference is replaced by its mean.

    ``classes`` is a sequence of ``(density, E[g], E[g^2])``. The tail
    beyond ``Rt`` has variance ``pi sum lam E[g^2] Rt^(2-2alpha)/(alpha-1)``;
    ``Rt`` makes its standard deviation ``tol`` times the mean interference
    beyond ``rho``, capped so that at most ``max_points`` points are drawn
    per trial on average.
    """
    m_near = sum(2.0 * math.pi * lam * m1 for lam, m1, _ in classes) * rho ** (2.0 - alpha) / (alpha - 2.0)
    var_coef = sum(math.pi * lam * m2 for lam, _, m2 in classes) / (alpha - 1.0)
    if m_near <= 0 or var_coef <= 0:
        return rho
    rt = (math.sqrt(var_coef) / (tol * m_near)) ** (1.0 / (alpha - 1.0))
    lam_tot = sum(lam for lam, _, _ in classes)
    cap = math.sqrt(max_points / (math.pi * lam_tot))
    return max(min(rt, cap), rho)


def tail_mean(lam: float, mean_gain: float, radius, alpha: float):
    """Mean interference from ``[radius, inf)``."""
    return 2.0 * math.pi * lam * mean_gain * np.asarray(radius, dtype=float) ** (2.0 - alpha) / (alpha - 2.0)


def _annulus_r2(rng, lam, a, b):
    """Per-trial annuli ``[a_i, b_i]``: returns (trial index, squared radius)."""
    area = math.pi * (b * b - a * a)
    counts = rng.poisson(lam * area)
    idx = np.repeat(np.arange(a.size), counts)
    u = rng.random(idx.size)
    a2 = (a * a)[idx]
    r2 = a2 + u * ((b * b)[idx] - a2)
    return idx, r2


def _sample_gain(law, rng, size):
    if isinstance(law, (GammaLaw, PatternGammaLaw)):
        return law.sample(rng, size)
    raise DomainError(f"unsupported gain law {law!r}")


def _gain_moments(law):
    return law.mean(), law.second_moment()


# --------------------------------------------------------------------------
# general scenarios


def _scenario_rt(scn: Scenario):
    classes = []
    for cls in scn.interferers:
        if math.isinf(cls.outer.fixed):
            m1, m2 = _gain_moments(cls.gain)
            classes.append((cls.density, m1, m2))
    rho = scn.serving.reference_radius()
    if not classes:
        return rho, math.inf
    return rho, truncation_radius(classes, scn.alpha, rho)


def mc_coverage_multi(scn: Scenario, gammas: Sequence[float], trials: int, seed: int,
                      truncation_scale: float = 1.0, workers=None) -> list[McEstimate]:
    """Coverage ``P(SINR > gamma)`` for several thresholds from one set of draws."""
    gammas = np.asarray(gammas, dtype=float)
    if truncation_scale < 1:
        raise DomainError("truncation_scale must be >= 1")
    alpha = scn.alpha
    rho, rt_ref = _scenario_rt(scn)

    def block(b, n):
        r0 = scn.serving.sample(block_rng(seed, b, 0), n)
        sig = block_rng(seed, b, 1).gamma(scn.signal_gain.shape, scn.signal_gain.scale, n)
        interference = np.full(n, float(scn.noise_power))
        for ci, cls in enumerate(scn.interferers):
            inner = np.broadcast_to(np.asarray(cls.inner(r0), dtype=float), (n,)).copy()
            if math.isinf(cls.outer.fixed):
                rt = rt_ref * np.maximum(1.0, np.maximum(r0, inner) / rho)
                shells = [(inner, rt)]
                if truncation_scale > 1:
                    shells.append((rt, truncation_scale * rt))
                interference += tail_mean(cls.density, cls.gain.mean(), truncation_scale * rt, alpha)
            else:
                outer = np.broadcast_to(np.asarray(cls.outer(r0), dtype=float), (n,))
                shells = [(inner, np.maximum(outer, inner))]
            for si, (a, bb) in enumerate(shells):
                rng = block_rng(seed, b, 2 + 2 * ci + si)
                idx, r2 = _annulus_r2(rng, cls.density, a, bb)
                g = _sample_gain(cls.gain, rng, idx.size)
                interference += np.bincount(idx, g * r2 ** (-0.5 * alpha), minlength=n)
        s = sig * r0 ** (-alpha)
        with np.errstate(divide="ignore"):
            sinr = np.where(interference > 0, s / np.where(interference > 0, interference, 1.0), np.inf)
        return (sinr[:, None] > gammas[None, :]).sum(axis=0)

    hits = _run_blocks(block, trials, workers)
    return [McEstimate.from_counts(int(h), int(trials), seed) for h in hits]


def mc_coverage_general(scn: Scenario, gamma: float, trials: int, seed: int,
                        truncation_scale: float = 1.0, workers=None) -> McEstimate:
    """Fraction of trials with ``SINR > gamma`` for a framework scenario."""
    return mc_coverage_multi(scn, [gamma], trials, seed, truncation_scale, workers)[0]


# --------------------------------------------------------------------------
# hetnet


def mc_hetnet_coverage(tiers: Sequence[TierParams], gammas, alpha: float, trials: int, seed: int,
                       truncation_scale: float = 1.0, workers=None) -> list[McEstimate]:
    """Max-biased-power association over independent tiers, SIR test."""
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    lam_tot = sum(t.lam for t in tiers)
    rho = 0.5 / math.sqrt(lam_tot)
    classes = [(t.lam, t.P, t.P * t.P * (t.U + 1.0) / t.U) for t in tiers]
    rt = truncation_radius(classes, alpha, rho)
    half = -0.5 * alpha

    def block(b, n):
        zeros = np.zeros(n)
        best_metric = np.zeros(n)
        sig = np.zeros(n)
        serving_contrib = np.zeros(n)
        interference = np.zeros(n)
        sig_rng = block_rng(seed, b, 0)
        for j, t in enumerate(tiers):
            shells = [(zeros, np.full(n, rt))]
            if truncation_scale > 1:
                shells.append((np.full(n, rt), np.full(n, truncation_scale * rt)))
            interference += tail_mean(t.lam, t.P, truncation_scale * rt, alpha)
            near_idx = np.empty(0, dtype=np.int64)
            near_r2 = np.empty(0)
            near_g = np.empty(0)
            for si, (a, bb) in enumerate(shells):
                rng = block_rng(seed, b, 1 + 2 * j + si)
                idx, r2 = _annulus_r2(rng, t.lam, a, bb)
                g = rng.gamma(t.U, t.P / t.U, idx.size)
                interference += np.bincount(idx, g * r2 ** half, minlength=n)
                if si == 0:
                    near_idx, near_r2, near_g = idx, r2, g
            # nearest point of the tier in each trial
            order = np.lexsort((near_r2, near_idx))
            sidx = near_idx[order]
            first = np.ones(sidx.size, dtype=bool)
            first[1:] = sidx[1:] != sidx[:-1]
            trials_hit = sidx[first]
            dmin2 = np.full(n, np.inf)
            dmin2[trials_hit] = near_r2[order][first]
            contrib = np.zeros(n)
            contrib[trials_hit] = (near_g[order][first]) * near_r2[order][first] ** half
            with np.errstate(divide="ignore"):
                metric = np.where(np.isfinite(dmin2), t.P * t.B * dmin2 ** half, 0.0)
            take = metric > best_metric
            shape = t.Mant - t.U + 1
            sig_t = sig_rng.gamma(shape, t.P / t.U, n) * np.where(np.isfinite(dmin2), dmin2, 1.0) ** half
            best_metric = np.where(take, metric, best_metric)
            sig = np.where(take, sig_t, sig)
            serving_contrib = np.where(take, contrib, serving_contrib)
        interference = np.maximum(interference - serving_contrib, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            sir = np.where(interference > 0, sig / np.where(interference > 0, interference, 1.0), np.inf)
        sir = np.where(best_metric > 0, sir, 0.0)
        return (sir[:, None] > gammas[None, :]).sum(axis=0)

    hits = _run_blocks(block, trials, workers)
    return [McEstimate.from_counts(int(h), int(trials), seed) for h in hits]


# --------------------------------------------------------------------------
# security


def _security_rt(p: SecurityParams, truncation_scale: float):
    # reference: interference beyond the link distance
    rho = p.r0
    # per-stream power 1/N: E[g] = 1, E[g^2] <= 2
    return truncation_scale * truncation_radius([(p.lambda_t, 1.0, 2.0)], p.alpha, rho)


def _offsets(n, span):
    return np.column_stack((np.arange(n) * span, np.zeros(n)))


def _legit_network(p: SecurityParams, rng, n, radius, typical_tx=None, typical_rx=None):
    """Transmitter PPP in ``radius`` (per trial), receivers at ``r0``, stream counts.

    Returns trial index, transmitter and receiver coordinates (local to
    the trial) and ``N_x``; the typical pair, when given, is appended as
    the first transmitter of each trial.
    """
    counts = rng.poisson(p.lambda_t * math.pi * radius * radius, n)
    idx = np.repeat(np.arange(n), counts)
    r = radius * np.sqrt(rng.random(idx.size))
    th = rng.uniform(0.0, 2.0 * math.pi, idx.size)
    tx = np.column_stack((r * np.cos(th), r * np.sin(th)))
    psi = rng.uniform(0.0, 2.0 * math.pi, idx.size)
    rx = tx + p.r0 * np.column_stack((np.cos(psi), np.sin(psi)))
    is_typical = np.zeros(idx.size, dtype=bool)
    if typical_tx is not None:
        idx = np.concatenate((np.arange(n), idx))
        tx = np.concatenate((typical_tx, tx))
        rx = np.concatenate((typical_rx, rx))
        is_typical = np.concatenate((np.ones(n, dtype=bool), is_typical))
        order = np.argsort(idx, kind="stable")
        idx, tx, rx, is_typical = idx[order], tx[order], rx[order], is_typical[order]
    K = np.zeros(idx.size, dtype=np.int64)
    if p.d0 > D0_EPS and idx.size:
        span = 4.0 * (radius + p.r0 + p.d0) + 10.0
        off = _offsets(n, span)[idx]
        pairs = cKDTree(tx + off).sparse_distance_matrix(cKDTree(rx + off), p.d0, output_type="ndarray")
        # a transmitter's own receiver is not a request
        i = pairs["i"][pairs["i"] != pairs["j"]]
        K = np.bincount(i, minlength=idx.size).astype(np.int64)
    n_streams = p.Nt - np.minimum(K, p.Nt - 1)
    return idx, tx, rx, K, n_streams, is_typical


def mc_connection_outage(p: SecurityParams, gammas, trials: int, seed: int,
                         truncation_scale: float = 1.0, workers=None) -> list[McEstimate]:
    """``P(SIR < gamma_l)`` at the typical legitimate receiver (origin)."""
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    alpha = p.alpha
    rt = _security_rt(p, truncation_scale)
    window = rt + p.d0 + p.r0

    def block(b, n):
        rng = block_rng(seed, b, 0)
        psi0 = rng.uniform(0.0, 2.0 * math.pi, n)
        x0 = p.r0 * np.column_stack((np.cos(psi0), np.sin(psi0)))
        idx, tx, _, K, Nx, typ = _legit_network(p, block_rng(seed, b, 1), n, window, x0, np.zeros((n, 2)))
        g_rng = block_rng(seed, b, 2)
        d2 = np.einsum("ij,ij->i", tx, tx)
        # signal: Gamma(N_x0, 1) over N_x0 streams
        sig = np.zeros(n)
        sig[idx[typ]] = g_rng.gamma(Nx[typ], 1.0) / Nx[typ] * p.r0 ** (-alpha)
        other = ~typ & (d2 <= rt * rt)
        oi, od2, oK, oN = idx[other], d2[other], K[other], Nx[other]
        inside = od2 <= p.d0 * p.d0 if p.d0 > D0_EPS else np.zeros(oi.size, dtype=bool)
        # inside the coordination range: nulled if our request is served
        served = g_rng.random(oi.size) < np.minimum(1.0, (p.Nt - 1) / np.maximum(oK, 1))
        gain = g_rng.gamma(oN, 1.0) / oN
        gain = np.where(inside & served, 0.0, gain)
        interference = np.bincount(oi, gain * od2 ** (-0.5 * alpha), minlength=n)
        interference += tail_mean(p.lambda_t, 1.0, rt, alpha)
        sir = sig / interference
        return (sir[:, None] < gammas[None, :]).sum(axis=0)

    hits = _run_blocks(block, trials, workers)
    return [McEstimate.from_counts(int(h), int(trials), seed) for h in hits]


def eavesdropper_radius(p: SecurityParams, gamma_e: float, budget: float = 1e-4) -> float:
    """Disc around the typical transmitter outside which eavesdroppers are ignored.

    An eavesdropper at distance ``r`` exceeds ``gamma_e`` with probability
    at most ``exp(-c r^2)``, ``c = pi lam_t Gamma(1-delta)Gamma(1+delta)(gamma_e/Nt)^delta``
    (Rayleigh signal against the interference of the other transmitters,
    each at least ``Gamma(1,1)/Nt``); the expected number of such
    eavesdroppers beyond ``Re`` is ``(lam_e pi / c) exp(-c Re^2)``.
    """
    delta = p.delta
    c = (math.pi * p.lambda_t * math.gamma(1.0 - delta) * math.gamma(1.0 + delta)
         * (gamma_e / p.Nt) ** delta)
    lead = p.lambda_e * math.pi / c
    if lead <= budget:
        return 0.0
    return math.sqrt(math.log(lead / budget) / c)


def mc_secrecy_outage(p: SecurityParams, gammas, trials: int, seed: int,
                      truncation_scale: float = 1.0, workers=None) -> list[McEstimate]:
    """``P(max_z SIR_e(z) > gamma_e)`` over the eavesdropper PPP."""
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    if p.lambda_e == 0:
        return [McEstimate.from_counts(0, int(trials), seed) for _ in gammas]
    alpha = p.alpha
    rt = _security_rt(p, truncation_scale)
    re = eavesdropper_radius(p, float(gammas.min()))
    reach = re + rt
    window = reach + p.d0 + p.r0
    tail = float(tail_mean(p.lambda_t, 1.0, rt, alpha))

    def block(b, n):
        rng = block_rng(seed, b, 0)
        psi0 = rng.uniform(0.0, 2.0 * math.pi, n)
        rx0 = p.r0 * np.column_stack((np.cos(psi0), np.sin(psi0)))
        idx, tx, _, K, Nx, typ = _legit_network(p, block_rng(seed, b, 1), n, window,
                                                np.zeros((n, 2)), rx0)
        e_rng = block_rng(seed, b, 2)
        ne = e_rng.poisson(p.lambda_e * math.pi * re * re, n)
        eidx = np.repeat(np.arange(n), ne)
        er = re * np.sqrt(e_rng.random(eidx.size))
        eth = e_rng.uniform(0.0, 2.0 * math.pi, eidx.size)
        ez = np.column_stack((er * np.cos(eth), er * np.sin(eth)))
        hits = np.zeros(gammas.size, dtype=np.int64)
        if eidx.size == 0:
            return hits
        N0 = np.zeros(n, dtype=np.int64)
        N0[idx[typ]] = Nx[typ]
        n0 = N0[eidx]
        g_rng = block_rng(seed, b, 3)
        d0sq = np.einsum("ij,ij->i", ez, ez)
        sig = g_rng.exponential(1.0, eidx.size) / n0 * d0sq ** (-0.5 * alpha)
        self_i = np.where(n0 > 1, g_rng.gamma(np.maximum(n0 - 1, 1), 1.0), 0.0) / n0 * d0sq ** (-0.5 * alpha)
        # other transmitters within rt of each eavesdropper
        keep = ~typ
        span = 4.0 * window + 10.0
        off = _offsets(n, span)
        t_pts = tx[keep] + off[idx[keep]]
        t_N = Nx[keep]
        pairs = cKDTree(ez + off[eidx]).sparse_distance_matrix(cKDTree(t_pts), rt, output_type="ndarray")
        order = np.lexsort((pairs["j"], pairs["i"]))
        owner = pairs["i"][order]
        flat = pairs["j"][order]
        diff = t_pts[flat] - (ez + off[eidx])[owner]
        dd2 = np.einsum("ij,ij->i", diff, diff)
        nn = t_N[flat]
        contrib = g_rng.gamma(nn, 1.0) / nn * dd2 ** (-0.5 * alpha)
        interference = self_i + np.bincount(owner, contrib, minlength=eidx.size) + tail
        sir = sig / interference
        best = np.zeros(n)
        np.maximum.at(best, eidx, sir)
        return (best[:, None] > gammas[None, :]).sum(axis=0)

    hits = _run_blocks(block, trials, workers)
    return [McEstimate.from_counts(int(h), int(trials), seed) for h in hits]


# --------------------------------------------------------------------------
# mmwave


def mc_mmwave_coverage(p: MmWaveParams, pattern: str = "cosine", trials: int = 100_000, seed: int = 0,
                       noise_power: float = 0.0, gammas=None, workers=None) -> list[McEstimate] | McEstimate:
    """LOS-ball coverage; trials without any LOS base station are not covered.

    ``noise_power`` is the noise-to-(transmit power x path-loss intercept)
    ratio; 0 gives the interference-limited model of the bound.
    """
    law = PatternGammaLaw(float(p.M), 1.0 / p.M, p.Nt, pattern, p.d_over_lambda)
    single = gammas is None
    gammas = np.atleast_1d(np.asarray([p.gamma] if single else gammas, dtype=float))
    alpha = p.alpha
    R = p.R

    def block(b, n):
        rng = block_rng(seed, b, 0)
        idx, r2 = _annulus_r2(rng, p.lambda_t, np.zeros(n), np.full(n, R))
        g = law.sample(rng, idx.size)
        sig = rng.gamma(p.M, 1.0 / p.M, n)
        order = np.lexsort((r2, idx))
        sidx = idx[order]
        first = np.ones(sidx.size, dtype=bool)
        first[1:] = sidx[1:] != sidx[:-1]
        has = np.zeros(n, dtype=bool)
        has[sidx[first]] = True
        rmin2 = np.ones(n)
        rmin2[sidx[first]] = r2[order][first]
        contrib = g * r2 ** (-0.5 * alpha)
        total = np.bincount(idx, contrib, minlength=n)
        serving = np.zeros(n)
        serving[sidx[first]] = contrib[order][first]
        interference = np.maximum(total - serving, 0.0) + noise_power
        s = sig * rmin2 ** (-0.5 * alpha)
        with np.errstate(divide="ignore"):
            sinr = np.where(interference > 0, s / np.where(interference > 0, interference, 1.0), np.inf)
        sinr = np.where(has, sinr, 0.0)
        return (sinr[:, None] > gammas[None, :]).sum(axis=0)

    hits = _run_blocks(block, trials, workers)
    out = [McEstimate.from_counts(int(h), int(trials), seed) for h in hits]
    return out[0] if single else out


__all__ = [
    "PointSet",
    "McEstimate",
    "BLOCK",
    "block_rng",
    "sample_ppp",
    "truncation_radius",
    "tail_mean",
    "mc_coverage_general",
    "mc_coverage_multi",
    "mc_hetnet_coverage",
    "mc_connection_outage",
    "mc_secrecy_outage",
    "eavesdropper_radius",
    "mc_mmwave_coverage",
]
