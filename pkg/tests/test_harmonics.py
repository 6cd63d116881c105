import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from hodge_scatter import harmonics as hm
from hodge_scatter.errors import UnsupportedError
from hodge_scatter.harmonics import Mode, ModeSet
from hodge_scatter.logcx import LogComplex

SUPPORTED = [(2, 0), (2, 1), (2, 2), (3, 0), (3, 1), (3, 2), (3, 3)]


def test_basis_dimensions():
    assert len(hm.basis(2, 1, 0)) == 2
    for l in range(1, 5):
        assert len(hm.basis(2, 1, l)) == 4
    assert len(hm.basis(3, 1, 1)) == 9
    for d in range(4, 8):
        assert len(hm.basis(d, 0, 2)) == hm.scalar_dim(d, 2)
    assert hm.scalar_dim(3, 4) == 9 and hm.scalar_dim(2, 0) == 1 and hm.scalar_dim(2, 3) == 2
    with pytest.raises(UnsupportedError):
        hm.basis(4, 1, 0)


def test_documented_low_degree_values():
    th = np.array([[math.cos(0.3), math.sin(0.3)]])
    assert_allclose(Mode(2, 0, 0, 0).values(th)[0, 0], 1 / math.sqrt(2 * math.pi))
    vals = sorted(abs(m.values(th)[0, 0]) for m in hm.basis(2, 0, 2))
    assert_allclose(vals, sorted([abs(math.cos(0.6)), abs(math.sin(0.6))]) / np.sqrt(np.pi))


@pytest.mark.parametrize("d,p", SUPPORTED + [(4, 0), (5, 0), (7, 0)])
def test_orthonormality(d, p):
    lmax = {2: 4, 3: 4, 4: 3}.get(d, 2)
    ms = ModeSet(d, p, lmax)
    # product rule exact for the degree-2*lmax integrand; kept small in high d
    X, W = hm.sphere_quadrature(d, lmax=2 * lmax) if d <= 4 else hm.sphere_quadrature(d, n=lmax + 3)
    V = hm.modeset_values(ms, X)  # (N, modes, comps)
    G = np.einsum("n,nac,nbc->ab", W, V.conj(), V)
    assert_allclose(G, np.eye(len(ms)), atol=1e-12)


def test_orthonormality_512_point_circle():
    X, W = hm.sphere_quadrature(2, n=512)
    ms = ModeSet(2, 1, 8)
    V = hm.modeset_values(ms, X)
    assert_allclose(np.einsum("n,nac,nbc->ab", W, V, V), np.eye(len(ms)), atol=1e-12)


def test_mode_json_and_order_stability():
    m = Mode(3, 1, 2, 7)
    assert Mode.from_json(m.to_json()) == m
    ms = ModeSet(3, 1, 2)
    assert ms.modes == ModeSet(3, 1, 2).modes
    assert ms.modes[ms.slice(1)][0] == Mode(3, 1, 1, 0)


def test_dr_wedge_scalar_example_d2():
    out = hm.dr_wedge(Mode(2, 0, 0, 0))
    X = np.array([[math.cos(t), math.sin(t)] for t in np.linspace(0, 6, 7)])
    val = sum(c * m.values(X) for m, c in out.items())
    assert all(m.l == 1 for m in out)
    assert_allclose(val, X / math.sqrt(2 * math.pi), atol=1e-12)


@pytest.mark.parametrize("d,p", [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)])
def test_dr_wedge_reconstruction(d, p):
    X, _ = hm.sphere_quadrature(d, lmax=6)
    for m in hm.basis(d, p, 2):
        rec = sum(c * mm.values(X) for mm, c in hm.dr_wedge(m).items())
        assert_allclose(rec, hm.pointwise_wedge(X, m.values(X), d, p), atol=1e-10)
        if p > 0:
            rec = sum(c * mm.values(X) for mm, c in hm.iota_dr(m).items())
            assert_allclose(rec, hm.pointwise_interior(X, m.values(X), d, p), atol=1e-10)


@pytest.mark.parametrize("d,p", [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)])
def test_wedge_and_interior_are_adjoint(d, p):
    L = 3
    W = hm.dr_wedge_matrix(d, p, L)  # ModeSet(d,p,L) -> ModeSet(d,p+1,L+1)
    I = hm.iota_dr_matrix(d, p + 1, L + 1)  # ModeSet(d,p+1,L+1) -> ModeSet(d,p,L+2)
    n = len(ModeSet(d, p, L))
    assert_allclose(W.conj().T, I[:n, :], atol=1e-10)


@settings(max_examples=50)
@given(st.integers(0, 2**31 - 1))
def test_clifford_identity(seed):
    rng = np.random.default_rng(seed)
    for d, p in [(2, 1), (3, 1), (3, 2)]:
        v = rng.normal(size=(5, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        phi = rng.normal(size=(5, hm.wedge_dim(d, p)))
        lhs = hm.pointwise_interior(v, hm.pointwise_wedge(v, phi, d, p), d, p + 1) + \
            hm.pointwise_wedge(v, hm.pointwise_interior(v, phi, d, p), d, p - 1)
        assert_allclose(lhs, phi, atol=1e-12)


@settings(max_examples=30)
@given(st.integers(0, 2**31 - 1))
def test_tau_involution(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(3, 3))
    f = lambda X: np.tanh(X @ c)
    X = rng.normal(size=(6, 3))
    assert_allclose(hm.tau_field(hm.tau_field(f))(X), f(X))
    assert_allclose(hm.tau_field(f)(X), f(-X))


def test_tau_coeffs_parity():
    ms = ModeSet(3, 1, 3)
    assert_allclose(hm.tau_coeffs(ms), [(-1) ** m.l for m in ms.modes])


def test_synth_single_mode_d3_example():
    m = Mode(3, 0, 0, 0)
    val = hm.synth_j(LogComplex(1.0), {m: 1.0}, np.array([[1.0, 0, 0]]))
    assert_allclose(val[0, 0], 2 * math.sin(1.0) / math.sqrt(4 * math.pi), rtol=1e-14)


@pytest.mark.parametrize("d,p", [(2, 0), (2, 1), (3, 1), (5, 0)])
def test_j_equals_h1_plus_h2(d, p):
    rng = np.random.default_rng(1)
    ms = ModeSet(d, p, 2)
    coeffs = {m: complex(*rng.normal(size=2)) for m in ms.modes}
    X = rng.normal(size=(4, d)) * 2
    lam = LogComplex(0.8, 0.3)
    assert_allclose(hm.synth_j(lam, coeffs, X), hm.synth_h1(lam, coeffs, X) + hm.synth_h2(lam, coeffs, X), rtol=1e-12)


def _fd_laplacian(f, x, h=1e-3):
    d = len(x)
    out = -2 * d * f(x[None, :])[0]
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out = out + f((x + e)[None, :])[0] + f((x - e)[None, :])[0]
    # fourth-order correction via Richardson with 2h
    return out / h ** 2


@pytest.mark.parametrize("kind", ["j", "h1"])
@pytest.mark.parametrize("d,p", [(2, 1), (3, 0), (3, 1)])
def test_helmholtz_residual(kind, d, p):
    lam = 1.3
    coeffs = {m: 1.0 for m in ModeSet(d, p, 2).modes}
    f = lambda X: hm.synth(kind, LogComplex(lam), coeffs, X)
    x = np.array([1.1, -0.7, 0.9][:d])
    h = 2e-3
    lap1 = _fd_laplacian(f, x, h)
    lap2 = _fd_laplacian(f, x, 2 * h)
    lap = (4 * lap1 - lap2) / 3
    res = lap + lam ** 2 * f(x[None, :])[0]
    assert np.max(np.abs(res)) / np.max(np.abs(f(x[None, :])[0])) < 1e-6


@pytest.mark.parametrize("d,p", [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2), (4, 0)])
def test_projection_recovers_coefficients(d, p):
    rng = np.random.default_rng(7)
    lmax = 3
    ms = ModeSet(d, p, lmax)
    c = rng.normal(size=len(ms)) + 1j * rng.normal(size=len(ms))
    X, W = hm.sphere_quadrature(d, lmax=lmax)
    vals = np.einsum("nac,a->nc", hm.modeset_values(ms, X), c)
    assert_allclose(hm.project_samples(ms, vals, X, W), c, atol=1e-10)


def test_multipole_examples():
    r3 = lambda X: 1 / np.linalg.norm(X, axis=1, keepdims=True)
    mp = hm.multipole_fit(r3, [1.0, 1.5, 2.0], 3, 3, 0)
    assert_allclose(mp.decay[Mode(3, 0, 0, 0)], math.sqrt(4 * math.pi), rtol=1e-10)
    assert all(abs(v) < 1e-10 for v in mp.growth.values())
    log2 = lambda X: (np.log(np.linalg.norm(X, axis=1)) - math.log(2))[:, None] / math.sqrt(2 * math.pi)
    mp = hm.multipole_fit(log2, [1.0, 2.0, 3.0], 3, 2, 0)
    m0 = Mode(2, 0, 0, 0)
    # log(r/2)/sqrt(2 pi) = (log r - log 2) * Phi_0
    assert_allclose(mp.logcoeff[m0], 1.0, atol=1e-10)
    assert_allclose(mp.growth[m0], -math.log(2), atol=1e-10)
    xr3 = lambda X: (X[:, 0] / np.linalg.norm(X, axis=1) ** 3)[:, None]
    mp = hm.multipole_fit(xr3, [1.0, 1.7, 2.5], 3, 3, 0)
    assert {m.l for m, v in mp.decay.items() if abs(v) > 1e-10} == {1}


def test_multipole_roundtrip():
    rng = np.random.default_rng(3)
    ms = ModeSet(3, 1, 2)
    mp = hm.MultipoleExpansion(3, 1, decay={m: rng.normal() for m in ms.modes}, growth={m: rng.normal() for m in ms.modes})
    fit = hm.multipole_fit(lambda X: hm.multipole_synth(mp, X), [1.0, 1.6, 2.3], 2, 3, 1)
    for m in ms.modes:
        assert_allclose(fit.decay[m], mp.decay[m], atol=1e-10)
        assert_allclose(fit.growth[m], mp.growth[m], atol=1e-10)


def test_jacobi_anger_examples():
    d2 = hm.jacobi_anger_defect(2, {Mode(2, 0, 0, 0): 1.0}, 1.0, np.array([1.0, 0.0]))
    assert np.max(np.abs(d2)) < 1e-10
    y10 = Mode(3, 0, 1, 0)  # the z-aligned degree-1 harmonic comes first
    d3 = hm.jacobi_anger_defect(3, {y10: 1.0}, 0.5, np.array([0.0, 0.6, 2 * math.sqrt(0.91)]))
    assert np.max(np.abs(d3)) < 1e-10
    assert np.all(hm.jacobi_anger_defect(3, {}, 1.0, np.array([1.0, 0, 0])) == 0)


@pytest.mark.parametrize("d,p", [(2, 0), (2, 1), (3, 0), (3, 1), (4, 0)])
def test_jacobi_anger_moderate_lr(d, p):
    rng = np.random.default_rng(11)
    g = {m: rng.normal() for m in ModeSet(d, p, 3).modes}
    for lr in [0.5, 3.0, 12.0]:
        x = rng.normal(size=d)
        x *= lr / np.linalg.norm(x)
        scale = np.max(np.abs(hm.plane_wave_integral(d, g, 1.0, x))) + 1e-300
        assert np.max(np.abs(hm.jacobi_anger_defect(d, g, 1.0, x))) < 1e-10 * max(1.0, scale)


@pytest.mark.parametrize("d", [2, 3])
def test_stationary_phase_far_field(d):
    g = {m: 1.0 for m in ModeSet(d, 0, 2).modes}
    x = np.array([0.6, 0.8, 0.0][:d]) if d == 2 else np.array([0.48, 0.64, 0.6])
    lam = 200.0
    exact = hm.plane_wave_integral(d, g, lam, x, n=800 if d == 2 else 600)
    approx = hm.stationary_phase_approx(d, g, lam, x)
    assert np.max(np.abs(exact - approx)) / np.max(np.abs(exact)) < 3 / lam
