"""The numba and numpy kernels must agree with each other."""

import numpy as np
import pytest

from conftest import random_density
from pwclock import _kernels
from pwclock.tomography import build_projector_set, cholesky_factor

needs_numba = pytest.mark.skipif(_kernels.numba is None, reason="numba not installed")


def _hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


@pytest.mark.parametrize("impl", ["compiled", "python"])
def test_jacobi_matches_lapack(rng, impl):
    fn = _kernels.jacobi_eigh
    if impl == "python":
        fn = getattr(fn, "py_func", fn)
    for d in (2, 4):
        for _ in range(20):
            m = _hermitian(rng, d)
            w, v = fn(m, 1e-15, 64)
            np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(m), atol=1e-12)
            assert np.max(np.abs((v * w) @ v.conj().T - m)) <= 1e-12


def test_jacobi_degenerate_and_zero():
    w, v = _kernels.jacobi_eigh(np.zeros((4, 4), dtype=complex), 1e-15, 64)
    np.testing.assert_array_equal(w, 0)
    w, v = _kernels.jacobi_eigh(np.eye(4, dtype=complex), 1e-15, 64)
    np.testing.assert_array_equal(w, 1)


def test_unpack_pack_roundtrip(rng):
    x = rng.normal(size=_kernels.N_PARAMS)
    t = _kernels._unpack_numpy(x)
    assert np.allclose(np.triu(t, 1), 0)
    np.testing.assert_array_equal(_kernels.pack_factor(t), x)
    if _kernels.numba is not None:
        np.testing.assert_array_equal(_kernels._unpack(x), t)


def test_objective_gradient_matches_finite_differences(rng):
    ps = build_projector_set()
    counts = rng.poisson(100, size=16).astype(float)
    x = rng.normal(size=_kernels.N_PARAMS)
    ll, g = _kernels._objective_numpy(x, ps.vectors, counts, counts.sum())
    h = 1e-6
    fd = np.empty_like(g)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        fd[i] = (
            _kernels._objective_numpy(x + e, ps.vectors, counts, counts.sum())[0]
            - _kernels._objective_numpy(x - e, ps.vectors, counts, counts.sum())[0]
        ) / (2 * h)
    np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-4)


@needs_numba
def test_objective_backends_agree(rng):
    ps = build_projector_set()
    counts = rng.poisson(50, size=16).astype(float)
    x = rng.normal(size=_kernels.N_PARAMS)
    ll_a, g_a = _kernels._objective_numpy(x, ps.vectors, counts, counts.sum())
    ll_b, g_b = _kernels._objective_numba(x, ps.vectors, counts, counts.sum())
    assert ll_a == pytest.approx(ll_b, rel=1e-12)
    np.testing.assert_allclose(g_a, g_b, rtol=1e-10, atol=1e-10)


@needs_numba
def test_ascent_backends_agree(rng):
    ps = build_projector_set()
    for _ in range(5):
        rho = random_density(rng)
        counts = rng.poisson(500 * ps.probabilities(rho)).astype(float)
        x0 = _kernels.pack_factor(cholesky_factor(0.9 * rho + 0.1 * np.eye(4) / 4))
        xa, ha, ia, ca = _kernels.mle_ascent_numpy(x0, ps.vectors, counts, 1e-10, 5000)
        xb, hb, ib, cb = _kernels.mle_ascent_numba(x0, ps.vectors, counts, 1e-10, 5000)
        assert ca and cb
        assert ha[-1] == pytest.approx(hb[-1], abs=1e-6)
        assert np.all(np.diff(ha) >= 0) and np.all(np.diff(hb) >= 0)


def test_ascent_zero_counts_is_identity_map():
    ps = build_projector_set()
    x0 = np.arange(1.0, 17.0)
    x, hist, it, conv = _kernels.mle_ascent_numpy(x0, ps.vectors, np.zeros(16), 1e-10, 100)
    assert it == 0 and conv
    np.testing.assert_allclose(x, x0 / np.linalg.norm(x0))
