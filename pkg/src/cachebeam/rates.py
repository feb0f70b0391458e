"""Finite-SNR symmetric delivery rates for the downlink schemes.

Three schemes share one accounting frame. Per serving subset S a common
per-subset rate is computed; the symmetric rate is the harmonic
combination weighted by how much of each file the subset's transmission
carries. Rates are in bits per channel use (log base 2); SNR is linear.

Schemes:
  MMFM     max-min fair multicast, one coded subfile per (t+1)-subset.
  MACC-CF  multi-antenna schedule combining chunks in the complex field;
           the per-chunk normalizer pays an extra (t+1) power factor.
  MACC-FF  same schedule with finite-field combining at full chunk power.

Per-subset power weights across the inner groups can optionally be
optimized (schemes "MACC-CF-opt"/"MACC-FF-opt" at the CLI level).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamforming import MaxminConfig, maxmin_multicast, zf_vector
from .channel import Channel
from .combinatorics import SystemParams, enumerate_subsets, subsets_within
from .errors import InvariantViolationError
from .linalg import project_simplex

MMFM = "MMFM"
MACC_CF = "MACC-CF"
MACC_FF = "MACC-FF"
SCHEMES = (MMFM, MACC_CF, MACC_FF)

MAX_MAC_GROUPS = 25


@dataclass(frozen=True)
class RateQuery:
    """One rate evaluation request."""

    params: SystemParams
    channel: Channel
    snr: float
    scheme: str
    power_opt: bool = False
    maxmin_config: MaxminConfig | None = None
    power_config: "PowerConfig | None" = None


@dataclass(frozen=True)
class SubsetRate:
    """Per serving subset: the common rate and what limited it."""

    subset: tuple[int, ...]
    common_rate: float
    binding_user: int
    binding_groups: tuple[tuple[int, ...], ...]
    power: "PowerAllocation | None" = None


@dataclass(frozen=True)
class RateResult:
    scheme: str
    snr: float
    symmetric_rate: float
    per_subset: tuple[SubsetRate, ...]
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class PowerAllocation:
    """Per-group transmit weights for one serving subset; sums to the group count."""

    subset: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]
    weights: tuple[float, ...]
    converged: bool = True

    def weight(self, group) -> float:
        return self.weights[self.groups.index(tuple(group))]


@dataclass
class PowerConfig:
    """Supergradient ascent with a step that halves whenever the best value
    stalls for `patience` iterations; stops once the step drops below `tol`."""

    max_iters: int = 10000
    tol: float = 1e-6
    patience: int = 100
    step_scale: float = 1.0


def _harmonic_symmetric(prefactor: float, rates) -> float:
    """prefactor / sum(1/rate). Zero if any rate is zero."""
    rates = list(rates)
    if any(r <= 0.0 for r in rates):
        return 0.0
    if len(rates) == 1 and prefactor == 1.0:
        return rates[0]
    return prefactor / math.fsum(1.0 / r for r in rates)


def _mask_sums(gains: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Subset sums and sizes for all 2^n masks (mask bit i = gains[i])."""
    sums = np.zeros(1)
    sizes = np.zeros(1, dtype=np.int64)
    for g in gains:
        sums = np.concatenate([sums, sums + g])
        sizes = np.concatenate([sizes, sizes + 1])
    return sums, sizes


def _mask_members(mask: int, items) -> tuple:
    return tuple(x for i, x in enumerate(items) if mask >> i & 1)


def _mac_values(weighted_gains: np.ndarray, scale: float, snr: float,
                group_count: int) -> np.ndarray:
    """Equal-rate value of every nonempty gain subset, aligned to mask-1."""
    sums, sizes = _mask_sums(weighted_gains)
    return (float(group_count) / sizes[1:]) * np.log2(1.0 + scale * sums[1:] * snr)


def mac_equal_rate(gains, scale: float, snr: float) -> float:
    """Common decodable rate of a user's chunk bundle at the equal-rate point.

    gains are the user's beamforming gains onto its chunks; every
    nonempty sub-bundle imposes a sum-rate cap, and the equal-rate point
    sits at the tightest one. Returns len(gains) times the per-chunk
    equal rate.
    """
    g = np.asarray(gains, dtype=np.float64)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("gains must be a non-empty 1-D sequence")
    if g.size > MAX_MAC_GROUPS:
        raise ValueError(f"{g.size} gains exceed the enumeration guard ({MAX_MAC_GROUPS})")
    if np.any(g < 0.0):
        raise ValueError("gains must be non-negative")
    if scale <= 0.0 or snr < 0.0:
        raise ValueError("scale must be positive and snr non-negative")
    return float(_mac_values(g, scale, snr, g.size).min())


def _scheme_scale(params: SystemParams, scheme: str) -> float:
    """Per-chunk SNR scale: 1 over the power normalizer of the scheme."""
    t, l = params.replication, params.num_antennas
    groups_per_subset = math.comb(t + l, t + 1)
    if scheme == MACC_FF:
        return 1.0 / float(groups_per_subset)
    if scheme == MACC_CF:
        return 1.0 / float(groups_per_subset * (t + 1))
    raise ValueError(f"unknown multi-antenna scheme {scheme!r}")


def _macc_prefactor(params: SystemParams) -> float:
    k, t, l = params.num_users, params.replication, params.num_antennas
    return math.comb(k, t) * math.comb(k - t - 1, l - 1) / math.comb(t + l - 1, t)


# ---------------------------------------------------------------------------
# MMFM


def mmfm_gain_table(params: SystemParams, channel: Channel,
                    config: MaxminConfig | None = None):
    """SNR-independent beamforming stage: per (t+1)-subset min gains."""
    params.require_baseline()
    t = params.replication
    table = []
    for s in enumerate_subsets(params.num_users, t + 1):
        beam = maxmin_multicast(s, channel, config)
        h_cols = channel.matrix[:, [u - 1 for u in s]]
        gains = np.abs(beam.weights.conj() @ h_cols) ** 2
        k = int(np.argmin(gains))
        table.append((s, float(gains[k]), s[k], beam.converged))
    return table


def mmfm_rate_from_table(table, params: SystemParams, snr: float) -> RateResult:
    per_subset = []
    warnings = []
    for s, min_gain, worst_user, converged in table:
        rate = float(np.log2(1.0 + min_gain * snr))
        per_subset.append(
            SubsetRate(subset=s, common_rate=rate, binding_user=worst_user,
                       binding_groups=(s,))
        )
        if not converged:
            warnings.append(f"beamformer for subset {s} did not converge")
    prefactor = float(math.comb(params.num_users, params.replication))
    sym = _harmonic_symmetric(prefactor, (sr.common_rate for sr in per_subset))
    return RateResult(scheme=MMFM, snr=snr, symmetric_rate=sym,
                      per_subset=tuple(per_subset), warnings=tuple(warnings))


def mmfm_rate(query: RateQuery) -> RateResult:
    """Symmetric rate of the max-min fair multicast baseline."""
    table = mmfm_gain_table(query.params, query.channel, query.maxmin_config)
    return mmfm_rate_from_table(table, query.params, query.snr)


# ---------------------------------------------------------------------------
# multi-antenna schedule


def macc_gain_table(params: SystemParams, channel: Channel):
    """SNR-independent stage: per serving subset, all |h_r^H u|^2 gains.

    Returns a list of (subset, groups, gain matrix) where gain[i, j] is
    member i's gain onto group j (NaN where member i is outside group j).
    """
    params.require_macc()
    t, l = params.replication, params.num_antennas
    table = []
    for s in enumerate_subsets(params.num_users, t + l):
        groups = tuple(subsets_within(s, t + 1))
        beams = {g: zf_vector(s, g, channel) for g in groups}
        gain = np.full((len(s), len(groups)), np.nan)
        for i, r in enumerate(s):
            h_r = channel.user_vector(r)
            for j, g in enumerate(groups):
                if r in g:
                    gain[i, j] = float(np.abs(np.vdot(h_r, beams[g])) ** 2)
        table.append((s, groups, gain))
    return table


def _subset_rate_uniform(s, groups, gain, scale, snr, group_count):
    """Min over members of the equal-rate value, with binding bookkeeping."""
    best = None
    for i, r in enumerate(s):
        own = [j for j, g in enumerate(groups) if r in g]
        values = _mac_values(gain[i, own], scale, snr, group_count)
        mask = int(np.argmin(values)) + 1
        val = float(values[mask - 1])
        if best is None or val < best[0]:
            best = (val, r, _mask_members(mask, [groups[j] for j in own]))
    val, user, binding = best
    return SubsetRate(subset=s, common_rate=val, binding_user=user,
                      binding_groups=binding)


def macc_rate_from_table(table, params: SystemParams, scheme: str, snr: float,
                         power_opt: bool = False,
                         power_config: PowerConfig | None = None) -> RateResult:
    scale = _scheme_scale(params, scheme)
    t, l = params.replication, params.num_antennas
    group_count = math.comb(t + l - 1, t)
    per_subset = []
    warnings = []
    for s, groups, gain in table:
        if power_opt:
            alloc, sr = _optimize_power_table(s, groups, gain, scale, snr,
                                              group_count, power_config)
            per_subset.append(sr)
            if not alloc.converged:
                warnings.append(f"power allocation for subset {s} did not converge")
        else:
            per_subset.append(
                _subset_rate_uniform(s, groups, gain, scale, snr, group_count)
            )
    sym = _harmonic_symmetric(
        _macc_prefactor(params), (sr.common_rate for sr in per_subset)
    )
    return RateResult(scheme=scheme, snr=snr, symmetric_rate=sym,
                      per_subset=tuple(per_subset), warnings=tuple(warnings))


def macc_rate(query: RateQuery) -> RateResult:
    """Symmetric rate of the multi-antenna cached schedule (CF or FF)."""
    table = macc_gain_table(query.params, query.channel)
    return macc_rate_from_table(table, query.params, query.scheme, query.snr,
                                power_opt=query.power_opt,
                                power_config=query.power_config)


def compute_rate(params: SystemParams, channel: Channel, snr: float, scheme: str,
                 power_opt: bool = False, maxmin_config: MaxminConfig | None = None,
                 power_config: PowerConfig | None = None) -> RateResult:
    """Scheme dispatch shared by the sweep drivers."""
    query = RateQuery(params=params, channel=channel, snr=snr, scheme=scheme,
                      power_opt=power_opt, maxmin_config=maxmin_config,
                      power_config=power_config)
    if scheme == MMFM:
        return mmfm_rate(query)
    if scheme in (MACC_CF, MACC_FF):
        return macc_rate(query)
    raise ValueError(f"unknown scheme {scheme!r}")


# ---------------------------------------------------------------------------
# per-subset power optimization


def _power_objective(p, s, groups, gain, scale, snr, group_count):
    """Objective value and the binding (member, mask) at weights p."""
    best = None
    for i, r in enumerate(s):
        own = [j for j, g in enumerate(groups) if r in g]
        values = _mac_values(p[own] * gain[i, own], scale, snr, group_count)
        mask = int(np.argmin(values)) + 1
        val = float(values[mask - 1])
        if best is None or val < best[0]:
            best = (val, i, own, mask)
    return best


def _optimize_power_table(s, groups, gain, scale, snr, group_count,
                          config: PowerConfig | None):
    """Projected supergradient ascent on the per-group weights.

    Normalized steps with halving on stall: whenever the best value has
    not improved for `patience` iterations the step is halved and the
    search restarts from the best point, down to a relative step of
    `tol`. Starting at the uniform split and keeping the best iterate
    makes the result never worse than uniform.
    """
    if config is None:
        config = PowerConfig()
    n_groups = len(groups)
    budget = float(n_groups)
    p = np.ones(n_groups)

    val, i_star, own, mask = _power_objective(p, s, groups, gain, scale, snr, group_count)
    best = (val, p.copy(), i_star, own, mask)
    step = config.step_scale
    stall = 0
    used = 0
    converged = False
    while used < config.max_iters:
        if step < config.tol:
            converged = True
            break
        used += 1
        # supergradient of the binding constraint at the current weights
        members = [own[b] for b in range(len(own)) if mask >> b & 1]
        ssum = float(np.sum(p[members] * gain[i_star, members]))
        coef = (group_count / bin(mask).count("1")) * scale * snr / (
            math.log(2.0) * (1.0 + scale * ssum * snr)
        )
        grad = np.zeros(n_groups)
        grad[members] = coef * gain[i_star, members]
        norm = float(np.linalg.norm(grad))
        if norm == 0.0:
            converged = True  # binding value cannot move; uniform best stays
            break
        p = project_simplex(p + (step / norm) * grad, total=budget)
        val, i_star, own, mask = _power_objective(p, s, groups, gain, scale, snr, group_count)
        if val > best[0]:
            best = (val, p.copy(), i_star, own, mask)
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                step *= 0.5
                stall = 0
                p = best[1].copy()
                val, i_star, own, mask = best[0], best[2], best[3], best[4]

    val, p_best, i_star, own, mask = best
    alloc = PowerAllocation(subset=s, groups=groups, weights=tuple(p_best),
                            converged=converged)
    binding = _mask_members(mask, [groups[j] for j in own])
    sr = SubsetRate(subset=s, common_rate=val, binding_user=s[i_star],
                    binding_groups=binding, power=alloc)
    return alloc, sr


def optimize_power(subset, channel: Channel, params: SystemParams, snr: float,
                   scheme: str, config: PowerConfig | None = None):
    """Optimize per-group power weights for one serving subset.

    Returns (PowerAllocation, SubsetRate). The weights live on the scaled
    simplex {p >= 0, sum p = group count}; starting from uniform weights
    and keeping the best iterate guarantees the result is never worse
    than the uniform split.
    """
    params.require_macc()
    members = tuple(subset)
    t, l = params.replication, params.num_antennas
    if len(members) != t + l:
        raise ValueError(f"serving subset must have t+L = {t + l} members")
    scale = _scheme_scale(params, scheme)
    group_count = math.comb(t + l - 1, t)
    groups = tuple(subsets_within(members, t + 1))
    beams = {g: zf_vector(members, g, channel) for g in groups}
    gain = np.full((len(members), len(groups)), np.nan)
    for i, r in enumerate(members):
        h_r = channel.user_vector(r)
        for j, g in enumerate(groups):
            if r in g:
                gain[i, j] = float(np.abs(np.vdot(h_r, beams[g])) ** 2)
    return _optimize_power_table(members, groups, gain, scale, snr, group_count, config)


# ---------------------------------------------------------------------------
# power accounting


def power_audit(params: SystemParams, allocation: PowerAllocation, scheme: str,
                snr: float, beam_norms_sq=None) -> float:
    """Analytic per-channel-use transmit power of one serving subset's slot.

    With unit-norm beams (the construction guarantees them) the chunk
    powers and the scheme normalizer telescope, so uniform weights give
    exactly `snr`. Raises InvariantViolationError if the accounting ever
    exceeds the power budget.
    """
    t, l = params.replication, params.num_antennas
    n_groups = math.comb(t + l, t + 1)
    if len(allocation.weights) != n_groups:
        raise ValueError(f"allocation has {len(allocation.weights)} weights, expected {n_groups}")
    if scheme == MACC_FF:
        symbol_factor = 1
    elif scheme == MACC_CF:
        symbol_factor = t + 1
    else:
        raise ValueError(f"unknown multi-antenna scheme {scheme!r}")
    if beam_norms_sq is None:
        beam_norms_sq = np.ones(n_groups)
    else:
        beam_norms_sq = np.asarray(beam_norms_sq, dtype=np.float64)
    weights = np.asarray(allocation.weights, dtype=np.float64)
    normalizer = float(n_groups * symbol_factor)
    total = snr * (float(np.sum(weights * beam_norms_sq)) * symbol_factor / normalizer)
    if total > snr * (1.0 + 1e-9):
        raise InvariantViolationError(
            f"per-use power {total} exceeds the budget {snr}"
        )
    return total
