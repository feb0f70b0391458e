"""Cache placement, delivery schedules, and a bit-exact decode harness.

Users are numbered 1..K. A file is split into one subfile per t-subset of
users (t = replication factor); each subfile is cached by exactly the
users in its subset. The multi-antenna schedule splits subfiles further
into mini-files so that several coded chunks can be sent per slot.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ScheduleError

MIN_FILE_BITS = 1024

BASELINE = "baseline"
MACC = "macc"


@dataclass(frozen=True)
class SystemParams:
    """Downlink system description.

    num_users: receivers (K), num_antennas: transmit antennas (L),
    library_size: files available (N), cache_size: files' worth of
    storage per user (M). The replication factor
    t = num_users * cache_size / library_size must be an integer.
    """

    num_users: int
    library_size: int
    cache_size: int
    num_antennas: int

    def __post_init__(self):
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.library_size < self.num_users:
            raise ValueError("library_size must be >= num_users")
        if not 0 <= self.cache_size <= self.library_size:
            raise ValueError("cache_size must lie in [0, library_size]")
        if not 1 <= self.num_antennas <= self.num_users:
            raise ValueError("num_antennas must lie in [1, num_users]")
        ratio = self.num_users * self.cache_size / self.library_size
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"replication K*M/N = {self.num_users}*{self.cache_size}/{self.library_size} "
                "is not an integer"
            )

    @property
    def replication(self) -> int:
        """Number of users caching each subfile (often called t)."""
        return round(self.num_users * self.cache_size / self.library_size)

    @property
    def cache_fraction(self) -> Fraction:
        return Fraction(self.replication, self.num_users)

    def require_baseline(self):
        """Baseline multicast needs serving groups of t+1 distinct users."""
        if self.replication + 1 > self.num_users:
            raise ValueError(
                f"baseline needs t+1 <= K, got t={self.replication}, K={self.num_users}"
            )

    def require_macc(self):
        """Multi-antenna delivery serves t+L users per slot."""
        if self.replication + self.num_antennas > self.num_users:
            raise ValueError(
                f"multi-antenna schedule needs t+L <= K, got t={self.replication}, "
                f"L={self.num_antennas}, K={self.num_users}"
            )


def enumerate_subsets(num_users: int, size: int) -> list[tuple[int, ...]]:
    """All size-subsets of {1..num_users} in lexicographic order."""
    if size < 0 or size > num_users:
        raise ValueError(f"subset size {size} out of range for {num_users} users")
    return list(itertools.combinations(range(1, num_users + 1), size))


def subsets_within(subset, size: int) -> list[tuple[int, ...]]:
    """All size-subsets of `subset` in lexicographic order."""
    members = tuple(subset)
    if size < 0 or size > len(members):
        raise ValueError(f"subset size {size} out of range for {members}")
    return list(itertools.combinations(members, size))


@dataclass(frozen=True)
class CacheContents:
    """Subfile index set held by one user: (file, subset) pairs."""

    user: int
    subfiles: tuple[tuple[int, tuple[int, ...]], ...]


def place_caches(params: SystemParams) -> list[CacheContents]:
    """Deterministic placement: user k stores every subfile whose subset contains k."""
    t = params.replication
    taus = enumerate_subsets(params.num_users, t)
    out = []
    for k in range(1, params.num_users + 1):
        stored = tuple(
            (n, tau)
            for n in range(1, params.library_size + 1)
            for tau in taus
            if k in tau
        )
        out.append(CacheContents(user=k, subfiles=stored))
    return out


def subfile_count(params: SystemParams) -> int:
    return math.comb(params.num_users, params.replication)


def part_count(params: SystemParams) -> int:
    """Mini-files per subfile in the multi-antenna schedule."""
    k, t, l = params.num_users, params.replication, params.num_antennas
    if t >= k:
        return 1
    return math.comb(k - t - 1, l - 1)


def baseline_file_bytes(params: SystemParams) -> int:
    """Smallest file size >= MIN_FILE_BITS that splits into whole-byte subfiles."""
    unit = subfile_count(params)
    return unit * max(1, -(-MIN_FILE_BITS // (8 * unit)))


def macc_file_bytes(params: SystemParams) -> int:
    """Smallest file size >= MIN_FILE_BITS that splits into whole-byte mini-files."""
    unit = subfile_count(params) * part_count(params)
    return unit * max(1, -(-MIN_FILE_BITS // (8 * unit)))


def validate_demands(params: SystemParams, demands) -> tuple[int, ...]:
    demands = tuple(int(d) for d in demands)
    if len(demands) != params.num_users:
        raise ValueError(f"need {params.num_users} demands, got {len(demands)}")
    for d in demands:
        if not 1 <= d <= params.library_size:
            raise ValueError(f"demand {d} outside library 1..{params.library_size}")
    return demands


def make_files(params: SystemParams, file_bytes: int, seed: int) -> dict[int, bytes]:
    """Random file contents, reproducible from the seed."""
    rng = np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), 0x66696C65]))
    return {
        n: rng.integers(0, 256, size=file_bytes, dtype=np.uint8).tobytes()
        for n in range(1, params.library_size + 1)
    }


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("xor operands must have equal length")
    return np.bitwise_xor(
        np.frombuffer(a, dtype=np.uint8), np.frombuffer(b, dtype=np.uint8)
    ).tobytes()


def _tau_index(params: SystemParams, tau: tuple[int, ...]) -> int:
    taus = enumerate_subsets(params.num_users, params.replication)
    try:
        return taus.index(tuple(tau))
    except ValueError:
        raise ValueError(f"{tau} is not a valid subfile subset") from None


def subfile_slice(params: SystemParams, data: bytes, tau) -> bytes:
    """The subfile of `data` indexed by the t-subset `tau`."""
    count = subfile_count(params)
    if len(data) % count != 0:
        raise ValueError(f"file length {len(data)} not divisible into {count} subfiles")
    size = len(data) // count
    i = _tau_index(params, tuple(tau))
    return data[i * size : (i + 1) * size]


def minifile_slice(params: SystemParams, data: bytes, tau, part: int) -> bytes:
    """Mini-file `part` (1-based) of the subfile indexed by `tau`."""
    sub = subfile_slice(params, data, tau)
    parts = part_count(params)
    if not 1 <= part <= parts:
        raise ValueError(f"part {part} outside 1..{parts}")
    if len(sub) % parts != 0:
        raise ValueError(f"subfile length {len(sub)} not divisible into {parts} parts")
    size = len(sub) // parts
    return sub[(part - 1) * size : part * size]


@dataclass(frozen=True)
class CodedMessage:
    """One transmitted payload: a finite-field sum addressed to `subset`."""

    kind: str  # "multicast" for the single-stream schedule, "chunk" for per-group sums
    subset: tuple[int, ...]
    payload: bytes


def build_baseline_message(subset, demands, files, params: SystemParams) -> CodedMessage:
    """Multicast payload for a (t+1)-subset: XOR of the members' wanted subfiles."""
    members = tuple(subset)
    payload = None
    for k in members:
        tau = tuple(u for u in members if u != k)
        piece = subfile_slice(params, files[demands[k - 1]], tau)
        payload = piece if payload is None else xor_bytes(payload, piece)
    return CodedMessage(kind="multicast", subset=members, payload=payload)


class IndexLedger:
    """Tracks which mini-file each (user, group) pair is owed next.

    Counters start at 1 and advance after every serving subset that
    covers the pair, so across the whole schedule each pair walks
    through its mini-file parts exactly once.
    """

    def __init__(self, params: SystemParams):
        params.require_macc()
        self.params = params
        self.limit = part_count(params)
        t = params.replication
        self.counts: dict[tuple[int, tuple[int, ...]], int] = {
            (r, group): 1
            for group in enumerate_subsets(params.num_users, t + 1)
            for r in group
        }

    def index(self, user: int, group) -> int:
        return self.counts[(user, tuple(group))]

    def bump(self, served) -> None:
        """Advance every (user, group) pair inside the just-served subset."""
        t = self.params.replication
        for group in subsets_within(served, t + 1):
            for r in group:
                self.counts[(r, group)] += 1


def build_ff_chunk(group, ledger: IndexLedger, demands, files, params: SystemParams) -> CodedMessage:
    """Finite-field chunk for a (t+1)-group: XOR of the members' next mini-files."""
    members = tuple(group)
    payload = None
    for r in members:
        part = ledger.index(r, members)
        if part > ledger.limit:
            raise ScheduleError(
                f"ledger exhausted for user {r}, group {members}: part {part} > {ledger.limit}"
            )
        tau = tuple(u for u in members if u != r)
        piece = minifile_slice(params, files[demands[r - 1]], tau, part)
        payload = piece if payload is None else xor_bytes(payload, piece)
    return CodedMessage(kind="chunk", subset=members, payload=payload)


@dataclass(frozen=True)
class DecodeReport:
    ok: bool
    scheme: str
    transmissions: int
    payload_bytes: int
    problems: tuple[str, ...] = ()


def _decode_baseline(params, demands, files):
    t = params.replication
    problems = []
    messages = [
        build_baseline_message(s, demands, files, params)
        for s in enumerate_subsets(params.num_users, t + 1)
    ]
    recovered = {k: {} for k in range(1, params.num_users + 1)}
    for msg in messages:
        for k in msg.subset:
            piece = msg.payload
            for j in msg.subset:
                if j == k:
                    continue
                tau_j = tuple(u for u in msg.subset if u != j)
                # tau_j contains k, so user k holds this subfile in cache
                piece = xor_bytes(piece, subfile_slice(params, files[demands[j - 1]], tau_j))
            tau_k = tuple(u for u in msg.subset if u != k)
            if tau_k in recovered[k]:
                problems.append(f"user {k}: subfile {tau_k} delivered twice")
            recovered[k][tau_k] = piece
    return messages, recovered, problems


def _decode_macc(params, demands, files):
    t = params.replication
    problems = []
    serving = enumerate_subsets(params.num_users, t + params.num_antennas)
    build_ledger = IndexLedger(params)
    messages = []
    for s in serving:
        for group in subsets_within(s, t + 1):
            messages.append((s, build_ff_chunk(group, build_ledger, demands, files, params)))
        build_ledger.bump(s)

    # decode with an independent ledger replay
    replay = IndexLedger(params)
    recovered = {k: {} for k in range(1, params.num_users + 1)}
    last_served = None
    for s, msg in messages:
        if last_served is not None and s != last_served:
            replay.bump(last_served)
        last_served = s
        for r in msg.subset:
            part = replay.index(r, msg.subset)
            piece = msg.payload
            for j in msg.subset:
                if j == r:
                    continue
                tau_j = tuple(u for u in msg.subset if u != j)
                part_j = replay.index(j, msg.subset)
                piece = xor_bytes(
                    piece, minifile_slice(params, files[demands[j - 1]], tau_j, part_j)
                )
            tau_r = tuple(u for u in msg.subset if u != r)
            if (tau_r, part) in recovered[r]:
                problems.append(f"user {r}: mini-file {tau_r} part {part} delivered twice")
            recovered[r][(tau_r, part)] = piece
    if last_served is not None:
        replay.bump(last_served)
    return [m for _, m in messages], recovered, problems


def verify_decode(params: SystemParams, demands, scheme: str, seed: int = 0,
                  file_bytes: int | None = None) -> DecodeReport:
    """Run a schedule end to end and check every user rebuilds its file bit-exactly.

    scheme is "baseline" (single-stream multicast) or "macc" (multi-antenna
    mini-file schedule). Returns a report rather than raising on decode
    failure; argument errors still raise.
    """
    if scheme not in (BASELINE, MACC):
        raise ValueError(f"unknown scheme {scheme!r}")
    demands = validate_demands(params, demands)
    t = params.replication
    k_total = params.num_users

    if t == k_total:
        # every subfile is cached everywhere: nothing to send
        return DecodeReport(ok=True, scheme=scheme, transmissions=0, payload_bytes=0)

    if scheme == BASELINE:
        params.require_baseline()
        if file_bytes is None:
            file_bytes = baseline_file_bytes(params)
    else:
        params.require_macc()
        if file_bytes is None:
            file_bytes = macc_file_bytes(params)

    files = make_files(params, file_bytes, seed)
    if scheme == BASELINE:
        messages, recovered, problems = _decode_baseline(params, demands, files)
    else:
        messages, recovered, problems = _decode_macc(params, demands, files)

    taus = enumerate_subsets(k_total, t)
    parts = part_count(params)
    for k in range(1, k_total + 1):
        want = files[demands[k - 1]]
        got = bytearray()
        for tau in taus:
            if k in tau:
                got.extend(subfile_slice(params, want, tau))
                continue
            if scheme == BASELINE:
                piece = recovered[k].get(tau)
                if piece is None:
                    problems.append(f"user {k}: subfile {tau} never delivered")
                    piece = b"\x00" * (file_bytes // len(taus))
                got.extend(piece)
            else:
                for part in range(1, parts + 1):
                    piece = recovered[k].get((tau, part))
                    if piece is None:
                        problems.append(f"user {k}: mini-file {tau} part {part} never delivered")
                        piece = b"\x00" * (file_bytes // (len(taus) * parts))
                    got.extend(piece)
        if bytes(got) != want:
            problems.append(f"user {k}: reconstructed file differs from the original")
        # coverage beyond the needed pieces would be a scheduling bug
        needed = (len(taus) - sum(1 for tau in taus if k in tau)) * (
            parts if scheme == MACC else 1
        )
        if len(recovered[k]) > needed:
            problems.append(f"user {k}: {len(recovered[k]) - needed} surplus deliveries")

    payload_bytes = sum(len(m.payload) for m in messages)
    return DecodeReport(
        ok=not problems,
        scheme=scheme,
        transmissions=len(messages),
        payload_bytes=payload_bytes,
        problems=tuple(problems),
    )
