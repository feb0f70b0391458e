"""Eigensolver and projection primitives."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cachebeam import (
    DegenerateChannelError,
    hermitian_eig,
    project_psd,
    project_psd_trace_one,
    project_simplex,
    unit_null_vector,
)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


def test_known_2x2_spectrum():
    # [[2, i], [-i, 2]] has eigenvalues 1 and 3
    a = np.array([[2.0, 1j], [-1j, 2.0]])
    vals, vecs = hermitian_eig(a)
    assert np.allclose(vals, [1.0, 3.0], atol=1e-12)
    assert np.linalg.norm(a @ vecs - vecs * vals) < 1e-10


def test_trace_identity_4x4():
    rng = np.random.default_rng(0)
    a = random_hermitian(rng, 4)
    vals, _ = hermitian_eig(a)
    assert abs(np.trace(a).real - vals.sum()) < 1e-10


@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 8))
def test_reconstruction_and_orthonormality(seed, n):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, n)
    vals, vecs = hermitian_eig(a)
    norm = np.linalg.norm(a)
    assert np.linalg.norm(a - (vecs * vals) @ vecs.conj().T) <= 1e-10 * max(norm, 1.0)
    assert np.linalg.norm(vecs.conj().T @ vecs - np.eye(n)) <= 1e-10
    assert np.all(np.diff(vals) >= 0.0)


def test_eigenvalues_ascending_and_phase_fixed():
    rng = np.random.default_rng(3)
    a = random_hermitian(rng, 5)
    _, vecs = hermitian_eig(a)
    for j in range(5):
        piv = vecs[np.argmax(np.abs(vecs[:, j])), j]
        assert piv.real > 0.0
        assert abs(piv.imag) < 1e-12


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        hermitian_eig(np.ones((2, 3)))
    with pytest.raises(ValueError):
        hermitian_eig(np.eye(17))
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))  # not Hermitian
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_psd_projection_clamps_negative_eigenvalues():
    a = np.diag([2.0, -1.0]).astype(complex)
    out = project_psd(a)
    assert np.allclose(out, np.diag([2.0, 0.0]), atol=1e-12)


def test_psd_projection_idempotent():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = random_hermitian(rng, 4)
        once = project_psd(a)
        assert np.linalg.norm(project_psd(once) - once) <= 1e-10


def test_trace_one_projection_lands_on_the_set():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a = random_hermitian(rng, 3)
        out = project_psd_trace_one(a)
        vals, _ = hermitian_eig(out)
        assert vals[0] >= -1e-12
        assert abs(np.trace(out).real - 1.0) <= 1e-10


def test_trace_one_projection_known_case():
    # eigenvalues (2, -1) project onto the probability simplex as (1, 0)
    out = project_psd_trace_one(np.diag([2.0, -1.0]).astype(complex))
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-10)


def test_trace_one_projection_is_nearest_point():
    rng = np.random.default_rng(13)
    a = random_hermitian(rng, 3)
    best = project_psd_trace_one(a)
    gap = np.linalg.norm(a - best)
    for _ in range(200):
        # random candidates from the feasible set
        b = random_hermitian(rng, 3)
        cand = project_psd(b)
        tr = np.trace(cand).real
        if tr <= 0:
            continue
        cand = cand / tr
        assert np.linalg.norm(a - cand) >= gap - 1e-9


@settings(max_examples=300, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(1, 12),
    total=st.floats(0.1, 50.0),
)
def test_simplex_projection_properties(seed, n, total):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) * 5.0
    out = project_simplex(v, total=total)
    assert np.all(out >= 0.0)
    assert abs(out.sum() - total) <= 1e-9 * max(total, 1.0)
    again = project_simplex(out, total=total)
    assert np.allclose(again, out, atol=1e-9)


def test_simplex_projection_known_values():
    out = project_simplex(np.array([2.0, 0.0]), total=1.0)
    assert np.allclose(out, [1.0, 0.0], atol=1e-12)
    out = project_simplex(np.array([0.6, 0.3]), total=1.0)
    assert np.allclose(out, [0.65, 0.35], atol=1e-12)


def test_simplex_projection_rejects_bad_args():
    with pytest.raises(ValueError):
        project_simplex(np.array([1.0]), total=0.0)
    with pytest.raises(ValueError):
        project_simplex(np.array([]))


def test_null_vector_is_orthogonal_and_unit():
    rng = np.random.default_rng(5)
    for _ in range(200):
        dim = rng.integers(2, 6)
        m = rng.integers(1, dim)
        vs = [rng.standard_normal(dim) + 1j * rng.standard_normal(dim) for _ in range(m)]
        u = unit_null_vector(vs)
        assert abs(np.linalg.norm(u) - 1.0) <= 1e-10
        for v in vs:
            assert abs(np.vdot(v, u)) <= 1e-9
        piv = u[np.argmax(np.abs(u))]
        assert piv.real > 0.0 and abs(piv.imag) < 1e-12


def test_null_vector_no_constraints_needs_dim():
    u = unit_null_vector([], dim=3)
    assert u.shape == (3,)
    assert abs(np.linalg.norm(u) - 1.0) <= 1e-12
    with pytest.raises(ValueError):
        unit_null_vector([])


def test_null_vector_degenerate_inputs():
    v = np.array([1.0 + 0j, 0.0])
    with pytest.raises(DegenerateChannelError):
        unit_null_vector([v, 1e-12 * v])  # nearly dependent pair
    with pytest.raises(DegenerateChannelError):
        unit_null_vector([np.array([1.0 + 0j, 0.0]), np.array([0.0, 1.0 + 0j])])


def test_null_vector_shape_mismatch():
    with pytest.raises(ValueError):
        unit_null_vector([np.ones(2), np.ones(3)])
    with pytest.raises(ValueError):
        unit_null_vector([np.ones(2)], dim=3)
