"""Small dense Hermitian eigen routines and convex projections.

Everything here operates on tiny matrices (antenna counts), so a
hand-rolled cyclic Jacobi sweep is plenty and keeps the numeric core
dependency-free. Eigenvectors follow a fixed phase convention so results
are bit-reproducible.
"""
from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import DegenerateChannelError, NumericalWarning

MAX_EIG_SIZE = 16


def _off_norm_sq(a: np.ndarray) -> float:
    """Sum of squared magnitudes of the off-diagonal entries.

    Summed entrywise with the diagonal masked out; subtracting the
    diagonal from the total would cancel catastrophically near
    convergence.
    """
    mags = np.abs(a) ** 2
    np.fill_diagonal(mags, 0.0)
    return float(np.sum(mags))


def _jacobi(a: np.ndarray, tol: float, max_sweeps: int):
    """Core cyclic Jacobi loop. `a` must be a fresh complex128 Hermitian array."""
    n = a.shape[0]
    vecs = np.eye(n, dtype=np.complex128)
    if n <= 1:
        return np.diag(a).real.copy(), vecs
    norm = float(np.linalg.norm(a))
    thresh_sq = (tol * max(norm, np.finfo(float).tiny)) ** 2
    # rotations on entries this small cannot push the off-norm above the
    # convergence threshold, and they hit denormal trouble; skip them
    skip_eps = tol * max(norm, np.finfo(float).tiny) / (n * n)
    converged = False
    for _ in range(max_sweeps):
        if _off_norm_sq(a) <= thresh_sq:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                beta = a[p, q]
                babs = abs(beta)
                if babs <= skip_eps:
                    continue
                phase = beta / babs
                tau = (a[q, q].real - a[p, p].real) / (2.0 * babs)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(tau, 1.0))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                sp = s * phase
                # column update (A <- A J), then row update (A <- J^H A)
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - sp.conjugate() * a[:, q]
                a[:, q] = sp * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - sp * a[q, :]
                a[q, :] = sp.conjugate() * row_p + c * a[q, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                vcol_p = vecs[:, p].copy()
                vecs[:, p] = c * vcol_p - sp.conjugate() * vecs[:, q]
                vecs[:, q] = sp * vcol_p + c * vecs[:, q]
    else:
        converged = _off_norm_sq(a) <= thresh_sq
    if not converged:
        warnings.warn("Jacobi eigensolver hit the sweep cap", NumericalWarning)

    eigvals = np.diag(a).real.copy()
    order = np.argsort(eigvals, kind="stable")
    eigvals = eigvals[order]
    vecs = vecs[:, order]
    for j in range(n):
        col = vecs[:, j]
        i = int(np.argmax(np.abs(col)))
        piv = col[i]
        if abs(piv) > 0.0:
            col *= piv.conjugate() / abs(piv)
        nrm = float(np.linalg.norm(col))
        if nrm > 0.0:
            col /= nrm
    return eigvals, vecs


def hermitian_eig(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    matrix : (n, n) complex ndarray, Hermitian within 1e-12 (relative),
        n <= 16.
    tol : relative off-diagonal Frobenius tolerance for convergence.
    max_sweeps : cap on full cyclic sweeps.

    Returns
    -------
    (eigvals, eigvecs) : eigvals ascending, real; eigvecs unit columns,
        matching order. Each eigenvector's largest-magnitude entry is
        rotated onto the real-positive axis.
    """
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_EIG_SIZE:
        raise ValueError(f"matrix size {a.shape[0]} exceeds supported size {MAX_EIG_SIZE}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    a = a.astype(np.complex128, copy=True)
    herm_gap = float(np.linalg.norm(a - a.conj().T))
    if herm_gap > 1e-12 * max(1.0, float(np.linalg.norm(a))):
        raise ValueError(f"matrix is not Hermitian (asymmetry {herm_gap:.3e})")
    a = 0.5 * (a + a.conj().T)
    return _jacobi(a, tol, max_sweeps)


def unit_null_vector(vectors, dim: int | None = None) -> np.ndarray:
    """Unit vector orthogonal to every vector in `vectors`.

    Builds the orthogonal-complement projector through a Gram solve and
    returns its top eigenvector. Raises DegenerateChannelError when the
    input vectors are close to linearly dependent (relative Gram
    eigenvalue below 1e-9) or when no null direction is left.
    """
    cols = [np.asarray(v, dtype=np.complex128).reshape(-1) for v in vectors]
    if not cols:
        if dim is None:
            raise ValueError("dim is required when no vectors are given")
        out = np.zeros(dim, dtype=np.complex128)
        out[0] = 1.0
        return out
    d = cols[0].size
    if dim is not None and dim != d:
        raise ValueError(f"dim {dim} does not match vector length {d}")
    if any(c.size != d for c in cols):
        raise ValueError("vectors must share a common length")
    basis = np.stack(cols, axis=1)  # (d, m)
    gram = basis.conj().T @ basis
    gram = 0.5 * (gram + gram.conj().T)
    gvals, gvecs = _jacobi(gram.astype(np.complex128), 1e-12, 100)
    if gvals[-1] <= 0.0 or gvals[0] < 1e-9 * gvals[-1]:
        raise DegenerateChannelError(
            f"constraint vectors nearly dependent (Gram spread {gvals[0]:.3e} vs {gvals[-1]:.3e})"
        )
    inv_gram = (gvecs / gvals) @ gvecs.conj().T
    proj = np.eye(d, dtype=np.complex128) - basis @ inv_gram @ basis.conj().T
    proj = 0.5 * (proj + proj.conj().T)
    pvals, pvecs = _jacobi(proj, 1e-12, 100)
    if pvals[-1] < 0.5:
        raise DegenerateChannelError("constraints leave no null direction")
    return pvecs[:, -1].copy()


def project_simplex(values: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection of a real vector onto {x >= 0, sum x = total}."""
    if total <= 0.0:
        raise ValueError("total must be positive")
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise ValueError("cannot project an empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0.0
    rho = int(np.nonzero(cond)[0][-1])
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_psd(matrix: np.ndarray) -> np.ndarray:
    """Nearest positive-semidefinite matrix in Frobenius norm."""
    a = np.asarray(matrix, dtype=np.complex128)
    a = 0.5 * (a + a.conj().T)
    vals, vecs = _jacobi(a.copy(), 1e-12, 100)
    clipped = np.maximum(vals, 0.0)
    out = (vecs * clipped) @ vecs.conj().T
    return 0.5 * (out + out.conj().T)


def project_psd_trace_one(matrix: np.ndarray) -> np.ndarray:
    """Nearest matrix in {X PSD, tr X = 1} in Frobenius norm.

    Works on the eigenvalues: project them onto the probability simplex
    and rebuild in the same eigenbasis.
    """
    a = np.asarray(matrix, dtype=np.complex128)
    a = 0.5 * (a + a.conj().T)
    vals, vecs = _jacobi(a.copy(), 1e-12, 100)
    simplex_vals = project_simplex(vals, 1.0)
    out = (vecs * simplex_vals) @ vecs.conj().T
    return 0.5 * (out + out.conj().T)
