"""Ergodic (channel-averaged) rate estimators.

Baseline path: per channel draw, pick the transmit covariance that
maximizes the sum of the subset's log rates under a unit trace budget
(primal-dual projected gradient), then average. Multi-antenna path:
per draw, evaluate the reference member's decodable rate from its
zero-forcing chunk gains and average. Both scale the per-subset mean
by the scheme's delivery prefactor and report a standard error.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .beamforming import zf_vector
from .channel import Channel, sample_matrix
from .combinatorics import SystemParams, subsets_within
from .errors import DegenerateChannelError, NumericalWarning
from .linalg import project_psd
from .rates import _mac_values


@dataclass
class ErgodicConfig:
    """Primal-dual gradient solve for the per-draw covariance.

    Steps decay as c/sqrt(j); the dual price of the trace budget is
    clipped at zero. Stops early once the best feasible objective has
    not improved (relatively) by tol for `patience` iterations.
    """

    step_sigma: float = 0.1
    step_nu: float = 0.1
    max_iters: int = 20000
    tol: float = 1e-6
    patience: int = 500


@dataclass(frozen=True)
class CovarianceResult:
    sigma: np.ndarray
    objective: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class EstimateResult:
    """Monte-Carlo ergodic rate estimate."""

    scheme: str
    snr: float
    value: float
    stderr: float
    trials: int
    skipped: int = 0
    fallback_fraction: float = 0.0


def _sum_log_rate(vectors: np.ndarray, sigma: np.ndarray, snr: float) -> float:
    quads = np.einsum("lk,lm,mk->k", vectors.conj(), sigma, vectors).real
    return float(np.sum(np.log2(1.0 + quads * snr)))


def optimize_covariance(vectors, snr: float,
                        config: ErgodicConfig | None = None) -> CovarianceResult:
    """Best transmit covariance for a user bundle under a unit trace budget.

    vectors is L x m (one column per served user). Maximizes the sum of
    log2(1 + h_k^H Sigma h_k * snr) over PSD Sigma with trace <= 1 by
    gradient ascent on the Lagrangian: PSD projection after each primal
    step, dual ascent on the trace violation. Returns the best feasible
    iterate (each candidate is normalized back into the trace budget).
    """
    if config is None:
        config = ErgodicConfig()
    h = np.asarray(vectors, dtype=np.complex128)
    if h.ndim != 2 or h.shape[1] == 0:
        raise ValueError("vectors must be an L x m matrix with m >= 1")
    dim = h.shape[0]
    outer = np.einsum("lk,mk->klm", h, h.conj())

    sigma = np.eye(dim, dtype=np.complex128) / dim
    nu = 0.0
    best_obj = _sum_log_rate(h, sigma, snr)
    best_sigma = sigma.copy()
    stall = 0
    used = 0
    converged = False
    for j in range(1, config.max_iters + 1):
        used = j
        quads = np.einsum("lk,lm,mk->k", h.conj(), sigma, h).real
        grad = np.einsum("k,klm->lm", snr / (1.0 + quads * snr), outer) - nu * np.eye(dim)
        sigma = project_psd(sigma + (config.step_sigma / math.sqrt(j)) * grad)
        trace = float(np.trace(sigma).real)
        nu = max(0.0, nu + (config.step_nu / math.sqrt(j)) * (trace - 1.0))
        candidate = sigma / max(1.0, trace)
        obj = _sum_log_rate(h, candidate, snr)
        if obj > best_obj:
            significant = obj > best_obj * (1.0 + config.tol)
            best_obj = obj
            best_sigma = candidate.copy()
            stall = 0 if significant else stall + 1
        else:
            stall += 1
        if stall >= config.patience:
            converged = True
            break
    return CovarianceResult(sigma=best_sigma, objective=best_obj,
                            iterations=used, converged=converged)


def _prefactor(params: SystemParams, antennas_in_play: int) -> float:
    k, t = params.num_users, params.replication
    return float(Fraction(t + antennas_in_play, k - t))


def ergodic_baseline(params: SystemParams, snr: float, trials: int = 2000,
                     seed: int = 0,
                     config: ErgodicConfig | None = None) -> EstimateResult:
    """Channel-averaged multicast rate of the single-shot baseline.

    One representative served subset stands in for all of them
    (user statistics are exchangeable), so the estimate is the scaled
    mean of the per-draw optimized subset rate.
    """
    params.require_baseline()
    if trials < 2:
        raise ValueError("need at least 2 trials for a standard error")
    t = params.replication
    m = t + 1
    values = np.empty(trials)
    for trial in range(trials):
        h = sample_matrix(params.num_antennas, m, seed, trial)
        res = optimize_covariance(h, snr, config)
        values[trial] = res.objective / m
    pref = _prefactor(params, 1)
    mean = pref * float(np.mean(values))
    stderr = pref * float(np.std(values, ddof=1) / math.sqrt(trials))
    return EstimateResult(scheme="MMFM", snr=snr, value=mean, stderr=stderr,
                          trials=trials)


def ergodic_macc_ff(params: SystemParams, snr: float, trials: int = 2000,
                    seed: int = 0, reference_index: int = 0) -> EstimateResult:
    """Channel-averaged rate of the finite-field multi-antenna scheme.

    Per draw, the reference member's decodable rate is the tightest of
    its bundle constraints; under exchangeable fading the full-bundle
    constraint dominates almost always, and taking the explicit minimum
    keeps the estimate conservative on the draws where it does not.
    Degenerate draws (zero-forcing breakdown) are skipped and counted.
    """
    params.require_macc()
    if trials < 2:
        raise ValueError("need at least 2 trials for a standard error")
    t, l = params.replication, params.num_antennas
    m = t + l
    if not 0 <= reference_index < m:
        raise ValueError(f"reference_index must be in [0, {m})")
    serving = tuple(range(1, m + 1))
    r = serving[reference_index]
    own_groups = [g for g in subsets_within(serving, t + 1) if r in g]
    scale = 1.0 / math.comb(t + l, t + 1)
    n_own = math.comb(t + l - 1, t)

    values = []
    skipped = 0
    fallbacks = 0
    for trial in range(trials):
        matrix = sample_matrix(l, m, seed, trial)
        channel = Channel(matrix=matrix, seed=seed, trial=trial)
        try:
            gains = np.array([
                float(np.abs(np.vdot(channel.user_vector(r),
                                     zf_vector(serving, g, channel))) ** 2)
                for g in own_groups
            ])
        except DegenerateChannelError:
            skipped += 1
            continue
        bundle = _mac_values(gains, scale, snr, n_own)
        idx = int(np.argmin(bundle))
        if idx != bundle.size - 1:
            fallbacks += 1
        values.append(float(bundle[idx]))

    if skipped > 0.01 * trials:
        warnings.warn(
            f"{skipped} of {trials} draws were degenerate and skipped",
            NumericalWarning, stacklevel=2,
        )
    if len(values) < 2:
        raise DegenerateChannelError("too few usable draws for an estimate")
    values = np.asarray(values)
    pref = _prefactor(params, l)
    mean = pref * float(np.mean(values))
    stderr = pref * float(np.std(values, ddof=1) / math.sqrt(values.size))
    return EstimateResult(scheme="MACC-FF", snr=snr, value=mean, stderr=stderr,
                          trials=trials, skipped=skipped,
                          fallback_fraction=fallbacks / max(1, len(values)))
