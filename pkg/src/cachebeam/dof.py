"""High-SNR slope of the symmetric rate: closed forms and empirical fits.

The closed forms are evaluated in exact rational arithmetic and only
converted to float at the end. The empirical estimator fits the slope
of the mean rate against log2(SNR) over the top decade of a geometric
SNR grid, which converges to the closed form as the grid climbs.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import sample_rayleigh
from .combinatorics import SystemParams
from .errors import NumericalWarning
from .interference import IcParams
from .rates import (
    MACC_CF,
    MACC_FF,
    MMFM,
    macc_gain_table,
    macc_rate_from_table,
    mmfm_gain_table,
    mmfm_rate_from_table,
)


@dataclass(frozen=True)
class DofReport:
    scheme: str
    analytic: float
    empirical: float
    snr_points: tuple[float, ...]


def dof_analytic(params, scheme: str | None = None) -> float:
    """Exact per-user degrees of freedom.

    For downlink shapes pass SystemParams plus a scheme name; for the
    interference channel pass IcParams (scheme ignored). A full cache
    (M = N) makes the slope infinite.
    """
    if isinstance(params, IcParams):
        kr = params.num_receivers
        t_t, t_r = params.tx_replication, params.rx_replication
        if t_r == kr:
            return math.inf
        served = min(kr, t_t + t_r)
        return float(Fraction(served, kr - t_r))
    if not isinstance(params, SystemParams):
        raise TypeError("params must be SystemParams or IcParams")
    k, l, t = params.num_users, params.num_antennas, params.replication
    if t == k:
        return math.inf
    if scheme == MMFM:
        return float(Fraction(1 + t, k - t))
    if scheme in (MACC_CF, MACC_FF):
        return float(Fraction(min(k, l + t), k - t))
    raise ValueError(f"unknown scheme {scheme!r}")


def dof_empirical(params: SystemParams, scheme: str, snr_grid,
                  draws: int = 20, seed: int = 0) -> DofReport:
    """Slope fit of the mean symmetric rate over the top decade of snr_grid.

    The grid must be geometric (uniform in log) and reach at least 1e8
    so the slope has flattened to its limit; at least 20 draws keep the
    channel average stable.
    """
    grid = sorted(float(s) for s in snr_grid)
    if len(grid) < 2:
        raise ValueError("snr_grid needs at least two points")
    if grid[-1] < 1e8:
        raise ValueError("snr_grid must reach at least 1e8")
    logs = np.log2(grid)
    steps = np.diff(logs)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-6 * steps[0]:
        raise ValueError("snr_grid must be geometric (uniform in log-SNR)")
    if draws < 20:
        raise ValueError("need at least 20 channel draws")

    mean_rates = np.zeros(len(grid))
    for trial in range(draws):
        channel = sample_rayleigh(params, seed, trial)
        if scheme == MMFM:
            table = mmfm_gain_table(params, channel)
            for i, snr in enumerate(grid):
                mean_rates[i] += mmfm_rate_from_table(table, params, snr).symmetric_rate
        else:
            table = macc_gain_table(params, channel)
            for i, snr in enumerate(grid):
                mean_rates[i] += macc_rate_from_table(
                    table, params, scheme, snr
                ).symmetric_rate
    mean_rates /= draws
    if np.any(np.diff(mean_rates) < 0):
        warnings.warn("mean rate is not monotone across the SNR grid",
                      NumericalWarning, stacklevel=2)

    top = logs >= logs[-1] - np.log2(10.0) * (1.0 + 1e-9)
    slope = float(np.polyfit(logs[top], mean_rates[top], 1)[0])
    return DofReport(
        scheme=scheme,
        analytic=dof_analytic(params, scheme),
        empirical=slope,
        snr_points=tuple(grid[i] for i in np.nonzero(top)[0]),
    )
