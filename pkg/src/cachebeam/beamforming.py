"""Zero-forcing directions and max-min fair multicast beamforming.

The multicast beamformer maximizes the worst user's beamforming gain
min_k |h_k^H w|^2 over unit-norm w. The semidefinite relaxation over
trace-one PSD matrices is solved by projected supergradient ascent, then
rounded back to a vector with Gaussian draws from the relaxed solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Channel, rng_for
from .linalg import project_psd_trace_one, unit_null_vector, _jacobi


def _fold_subset(subset) -> int:
    """Stable 64-bit fold of a user subset, used to key rounding draws."""
    h = 1469598103934665603
    for u in subset:
        h = ((h ^ int(u)) * 1099511628211) & ((1 << 64) - 1)
    return h


def zf_vector(serve, inner, channel: Channel) -> np.ndarray:
    """Unit beam for `inner` inside serving set `serve`: nulls every user in serve\\inner.

    Raises DegenerateChannelError when the nulled users' vectors are too
    close to dependent for a reliable null direction.
    """
    serve = tuple(serve)
    inner = tuple(inner)
    if not set(inner) <= set(serve):
        raise ValueError(f"{inner} is not contained in {serve}")
    nulled = [u for u in serve if u not in inner]
    dim = channel.num_antennas
    if len(nulled) >= dim:
        raise ValueError(
            f"cannot null {len(nulled)} users with {dim} antennas"
        )
    return unit_null_vector([channel.user_vector(u) for u in nulled], dim=dim)


@dataclass
class MaxminConfig:
    """Knobs for the relaxation solver and the rounding stage."""

    max_iters: int = 5000
    tol: float = 1e-6
    patience: int = 100
    step_scale: float = 1.0
    rounding_draws: int = 1000
    seed: int = 0


@dataclass(eq=False)
class MulticastBeam:
    subset: tuple[int, ...]
    weights: np.ndarray  # (num_antennas,), unit norm
    min_gain: float
    relaxation_value: float
    iterations: int
    converged: bool


def _phase_fix(w: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(w)))
    piv = w[i]
    if abs(piv) > 0.0:
        w = w * (piv.conjugate() / abs(piv))
    return w


def maxmin_multicast(subset, channel: Channel, config: MaxminConfig | None = None) -> MulticastBeam:
    """Max-min fair multicast beam for the users in `subset`.

    Single-user and single-antenna cases are closed form. Otherwise a
    two-stage procedure: supergradient ascent on the trace-one PSD
    relaxation with Polyak-style best-iterate tracking and a diminishing
    step, then Gaussian rounding (the relaxation's top eigenvector is
    always among the candidates, so the rounded beam can only improve on
    it). Ties in the worst user go to the lowest user index; all
    randomness is keyed by (config.seed, subset), so results reproduce.
    """
    if config is None:
        config = MaxminConfig()
    members = tuple(subset)
    if not members:
        raise ValueError("subset must not be empty")
    h_cols = channel.matrix[:, [u - 1 for u in members]]  # (L, m)
    dim, m = h_cols.shape

    if dim == 1:
        w = np.ones(1, dtype=np.complex128)
        gains = np.abs(w.conj() @ h_cols) ** 2
        k = int(np.argmin(gains))
        return MulticastBeam(members, w, float(gains[k]), float(gains[k]), 0, True)
    if m == 1:
        h = h_cols[:, 0]
        nrm = float(np.linalg.norm(h))
        if nrm == 0.0:
            raise ValueError(f"user {members[0]} has a zero channel vector")
        w = _phase_fix(h / nrm)
        gain = float(np.abs(np.vdot(h, w)) ** 2)
        return MulticastBeam(members, w, gain, gain, 0, True)

    outer = np.einsum("lk,mk->klm", h_cols, h_cols.conj())  # outer[k] = h_k h_k^H
    v = np.eye(dim, dtype=np.complex128) / dim
    hc = h_cols.conj()

    best_obj = -math.inf
    best_v = v
    stall = 0
    iters = 0
    converged = False
    for j in range(1, config.max_iters + 1):
        iters = j
        gains = np.einsum("lk,lm,mk->k", hc, v, h_cols).real
        k_star = int(np.argmin(gains))  # first index wins ties
        obj = float(gains[k_star])
        if obj > best_obj:
            significant = obj > best_obj * (1.0 + config.tol) or best_obj <= 0.0
            best_obj = obj
            best_v = v
            if significant:
                stall = 0
            else:
                stall += 1
        else:
            stall += 1
        if stall >= config.patience:
            converged = True
            break
        step = config.step_scale / math.sqrt(j)
        v = project_psd_trace_one(v + step * outer[k_star])

    # rounding: Gaussian candidates from the relaxed solution plus its top eigenvector
    vals, vecs = _jacobi(0.5 * (best_v + best_v.conj().T), 1e-12, 100)
    root = vecs * np.sqrt(np.maximum(vals, 0.0))
    rng = rng_for(config.seed, _fold_subset(members))
    draws = config.rounding_draws
    cand = root @ (
        (rng.standard_normal((dim, draws)) + 1j * rng.standard_normal((dim, draws)))
        * np.sqrt(0.5)
    )
    cand = np.concatenate([cand, vecs[:, -1:]], axis=1)
    norms = np.linalg.norm(cand, axis=0)
    norms[norms == 0.0] = 1.0
    cand /= norms
    min_gains = (np.abs(hc.T @ cand) ** 2).min(axis=0)
    best = int(np.argmax(min_gains))
    w = _phase_fix(cand[:, best].copy())
    return MulticastBeam(
        subset=members,
        weights=w,
        min_gain=float(min_gains[best]),
        relaxation_value=best_obj,
        iterations=iters,
        converged=converged,
    )
