"""Seeded Rayleigh channel draws and a plain-text matrix format.

Draws use a counter-based generator keyed by (seed, trial), so any trial
of any sweep can be regenerated in isolation and trials are independent
streams.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .combinatorics import SystemParams
from .errors import ChannelParseError

_MASK64 = (1 << 64) - 1


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """Generator keyed by (seed, stream); same key, same sequence."""
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(eq=False, frozen=True)
class Channel:
    """One channel realization: matrix column k-1 is user k's vector."""

    matrix: np.ndarray  # (num_antennas, num_users) complex128
    seed: int | None = None
    trial: int | None = None

    @property
    def num_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_users(self) -> int:
        return self.matrix.shape[1]

    def user_vector(self, user: int) -> np.ndarray:
        if not 1 <= user <= self.num_users:
            raise ValueError(f"user {user} outside 1..{self.num_users}")
        return self.matrix[:, user - 1]


def sample_matrix(rows: int, cols: int, seed: int, trial: int) -> np.ndarray:
    """i.i.d. unit-variance complex Gaussian entries (variance 1/2 per part)."""
    rng = rng_for(seed, trial)
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) * np.sqrt(0.5)


def sample_rayleigh(params: SystemParams, seed: int, trial: int) -> Channel:
    """Fading draw for one downlink use: antennas x users."""
    matrix = sample_matrix(params.num_antennas, params.num_users, seed, trial)
    return Channel(matrix=matrix, seed=seed, trial=trial)


def channel_to_text(matrix: np.ndarray, path) -> None:
    """Write a complex matrix as lines of whitespace-separated "re,im" pairs.

    Components are written with repr-style shortest round-trip formatting,
    so reading the file back reproduces the matrix bit-exactly.
    """
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    with open(path, "w", encoding="ascii") as fh:
        for row in m:
            fh.write(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
            fh.write("\n")


def channel_from_text(path) -> Channel:
    """Parse the matrix format of channel_to_text. Errors carry line/column."""
    rows: list[list[complex]] = []
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        row: list[complex] = []
        pos = 0
        for token in line.split(" "):
            start_col = pos + 1  # 1-based column of the token start
            pos += len(token) + 1
            if not token:
                continue
            parts = token.split(",")
            if len(parts) != 2:
                raise ChannelParseError(
                    f"expected 're,im', got {token!r}", lineno, start_col
                )
            try:
                row.append(complex(float(parts[0]), float(parts[1])))
            except ValueError:
                raise ChannelParseError(
                    f"bad numeric component in {token!r}", lineno, start_col
                ) from None
        if row:
            if rows and len(row) != len(rows[0]):
                raise ChannelParseError(
                    f"row has {len(row)} entries, expected {len(rows[0])}", lineno, 1
                )
            rows.append(row)
    if not rows:
        raise ChannelParseError("no matrix entries found", 1, 1)
    return Channel(matrix=np.array(rows, dtype=np.complex128))
