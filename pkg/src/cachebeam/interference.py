"""Cache-aided interference channel: cached transmitters cooperating as
distributed antenna arrays.

Each file is cut into sub-libraries indexed by t_T-subsets of the
transmitters; the transmitters holding a sub-library beamform jointly,
so delivering one sub-library is exactly a downlink problem with t_T
antennas on the column-submatrix of the cross channel. Sub-libraries
are served one after another in lexicographic order, which combines
their rates harmonically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Channel, sample_matrix
from .combinatorics import CacheContents, SystemParams, enumerate_subsets, place_caches
from .rates import (
    MMFM,
    RateResult,
    SubsetRate,
    _harmonic_symmetric,
    compute_rate,
)


@dataclass(frozen=True)
class IcParams:
    """Interference-channel shape: cached transmitters and cached receivers."""

    num_transmitters: int
    num_receivers: int
    library_size: int
    transmitter_cache: float
    receiver_cache: float

    def __post_init__(self):
        if self.num_transmitters < 1:
            raise ValueError("need at least one transmitter")
        if self.num_receivers < 1:
            raise ValueError("need at least one receiver")
        if self.library_size < self.num_receivers:
            raise ValueError("library must hold at least one file per receiver")
        if not 0 < self.transmitter_cache <= self.library_size:
            raise ValueError("transmitter cache must be in (0, library size]")
        if not 0 <= self.receiver_cache <= self.library_size:
            raise ValueError("receiver cache must be in [0, library size]")
        for label, loads in (
            ("transmitter", self.num_transmitters * self.transmitter_cache),
            ("receiver", self.num_receivers * self.receiver_cache),
        ):
            ratio = loads / self.library_size
            if abs(ratio - round(ratio)) > 1e-9:
                raise ValueError(
                    f"{label} replication {ratio} is not an integer; "
                    "cache size must tile the library"
                )
        if self.tx_replication < 1:
            raise ValueError(
                "every sub-library must fit in at least one transmitter cache "
                "(num_transmitters * transmitter_cache >= library_size)"
            )

    @property
    def tx_replication(self) -> int:
        return round(self.num_transmitters * self.transmitter_cache / self.library_size)

    @property
    def rx_replication(self) -> int:
        return round(self.num_receivers * self.receiver_cache / self.library_size)

    def downlink_equivalent(self) -> SystemParams:
        """The per-sub-library downlink shape: t_T cooperating antennas."""
        return SystemParams(
            num_users=self.num_receivers,
            library_size=self.library_size,
            cache_size=self.receiver_cache,
            num_antennas=self.tx_replication,
        )


@dataclass(frozen=True)
class IcPlacement:
    """Who stores what: transmitter sub-library assignments and receiver caches."""

    sublibraries: tuple[tuple[int, ...], ...]
    transmitter_map: dict[int, tuple[tuple[int, ...], ...]]
    receiver_caches: tuple[CacheContents, ...]
    subfiles_per_file: int


def ic_placement(icp: IcParams) -> IcPlacement:
    """Cut the library across transmitters and fill the receiver caches.

    A sub-library indexed by a transmitter subset is replicated at every
    member of that subset; receiver caches follow the ordinary downlink
    placement of the equivalent system.
    """
    groups = enumerate_subsets(icp.num_transmitters, icp.tx_replication)
    tx_map = {
        i: tuple(g for g in groups if i in g)
        for i in range(1, icp.num_transmitters + 1)
    }
    equivalent = icp.downlink_equivalent()
    rx = place_caches(equivalent)
    per_file = len(groups) * len(enumerate_subsets(icp.num_receivers, icp.rx_replication))
    return IcPlacement(
        sublibraries=tuple(groups),
        transmitter_map=tx_map,
        receiver_caches=rx,
        subfiles_per_file=per_file,
    )


def sample_ic_rayleigh(icp: IcParams, seed: int, trial: int) -> np.ndarray:
    """Cross-channel draw, receivers x transmitters."""
    return sample_matrix(icp.num_transmitters, icp.num_receivers, seed, trial).T


def ic_rate(icp: IcParams, snr: float, channel: np.ndarray, scheme: str,
            power_opt: bool = False) -> RateResult:
    """Symmetric rate of the interference-channel delivery.

    Serves each sub-library through its transmitter group acting as one
    t_T-antenna array on the matching column-submatrix (transposed to
    antennas x receivers), then combines the group rates harmonically.
    """
    channel = np.asarray(channel)
    if channel.shape != (icp.num_receivers, icp.num_transmitters):
        raise ValueError(
            f"channel must be receivers x transmitters "
            f"({icp.num_receivers} x {icp.num_transmitters}), got {channel.shape}"
        )
    equivalent = icp.downlink_equivalent()
    if scheme == MMFM:
        equivalent.require_baseline()
    else:
        equivalent.require_macc()
    groups = enumerate_subsets(icp.num_transmitters, icp.tx_replication)
    per_group = []
    for g in groups:
        sub = np.ascontiguousarray(channel[:, [i - 1 for i in g]].T)
        result = compute_rate(equivalent, Channel(matrix=sub), snr, scheme,
                              power_opt=power_opt)
        slowest = min(result.per_subset, key=lambda sr: sr.common_rate)
        per_group.append(
            SubsetRate(subset=g, common_rate=result.symmetric_rate,
                       binding_user=slowest.binding_user,
                       binding_groups=(slowest.subset,))
        )
    sym = _harmonic_symmetric(
        float(len(groups)), (sr.common_rate for sr in per_group)
    )
    return RateResult(scheme=scheme, snr=snr, symmetric_rate=sym,
                      per_subset=tuple(per_group))
