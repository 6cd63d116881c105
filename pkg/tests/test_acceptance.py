"""Acceptance suite: one test (or small group) per criterion, each at its stated tolerance.

Every test carries ``@pytest.mark.criterion(id)``; the conftest summary hook prints a
single PASS/FAIL line per criterion id at the end of the run.  Checks whose literal
target value disagrees with an independent derivation are kept literal and allowed to
fail; the independently derived value is reported in the detail text.
"""
import cmath
import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hodge_scatter import bem2d, hahn
from hodge_scatter import ball_scatter as bs
from hodge_scatter import harmonics as hm
from hodge_scatter import lowenergy as le
from hodge_scatter import specfun as sf
from hodge_scatter import sshift as ss
from hodge_scatter.ball_scatter import Ball
from hodge_scatter.hahn import HahnExponent as E, HahnSeries
from hodge_scatter.harmonic_forms import ball_l2_basis, disc_resonance
from hodge_scatter.harmonics import Mode, ModeSet
from hodge_scatter.logcx import LogComplex

EULER = 0.5772156649015329


# ---------------------------------------------------------------- 1. special functions

def _closed_forms(l, x):
    """d = 3 half-integer closed forms evaluated in 40-digit arithmetic (no cancellation)."""
    x = mp.mpf(x)  # caller holds mp.workdps(60): the l=2 form cancels ~32 digits at x=1e-6
    s, c, e = mp.sin(x), mp.cos(x), mp.exp(1j * x)
    if l == 0:
        return s / x, -1j * e / x
    if l == 1:
        return s / x ** 2 - c / x, -e / x * (1 + 1j / x)
    return (3 / x ** 3 - 1 / x) * s - 3 * c / x ** 2, 1j * e / x * (1 + 3j / x - 3 / x ** 2)


@pytest.mark.criterion("1")
def test_c1_closed_forms(record_property):
    worst = 0.0
    for x in np.geomspace(1e-6, 50.0, 60):
        for l in (0, 1, 2):
            with mp.workdps(60):
                j_ref, h_ref = (complex(v) for v in _closed_forms(l, x))
            z = LogComplex(float(x))
            worst = max(worst, abs(sf.sph_j(3, l, z) - j_ref) / abs(j_ref),
                        abs(sf.sph_h1(3, l, z) - h_ref) / abs(h_ref))
    record_property("detail", f"closed forms max rel err {worst:.2e} (<1e-12)")
    assert worst < 1e-12


@pytest.mark.criterion("1")
def test_c1_rotation_identities(record_property):
    worst = 0.0
    for kind in (1, 2):
        for d in (2, 3, 4):
            for l in range(11):
                for x in (0.3, 1.0, 5.0):
                    scale = abs(sf.sph_h1(d, l, LogComplex(x)))
                    worst = max(worst, abs(sf.rotation_defect(kind, d, l, x)) / scale)
    record_property("detail", f"rotation defect max {worst:.2e} relative to |h1| (<1e-10)")
    assert worst < 1e-10


# ---------------------------------------------------------------- 2. Hahn algebra

_alphas = st.integers(0, 8).map(lambda k: Fraction(k, 2))
_betas = st.integers(-2, 4)
_coeffs = st.builds(complex, st.integers(-5, 5), st.integers(-5, 5))
_T = E(4, 0)


@st.composite
def _series(draw):
    terms = {}
    for _ in range(draw(st.integers(0, 5))):
        a, b = draw(_alphas), draw(_betas)
        if a == 0 and b < 0:
            b = -b
        if E(a, b) < _T:
            terms[E(a, b)] = draw(_coeffs)
    return HahnSeries(terms, _T)


@st.composite
def _invertible(draw):
    lead = E(draw(st.integers(0, 3)), draw(st.integers(0, 2)))
    terms = {lead: complex(draw(st.floats(0.5, 3)), draw(st.floats(-1, 1)))}
    for da, b, c in draw(st.lists(st.tuples(st.integers(1, 6), _betas, st.floats(-2, 2)), max_size=4)):
        e = lead + E(Fraction(da, 2), b)
        if c != 0 and not e.violates(8.0):
            terms[e] = c
    return HahnSeries(terms, trunc=lead + E(4, 0))


def _agree(x, y):
    """Exact equality modulo the coarser of the two error terms.

    Both sides of an identity are correct truncated series, but cancellation can
    leave one side known to higher order (e.g. ``0 * (b - b)`` vs ``0*b - 0*b``).
    """
    t = min(x.trunc, y.trunc)
    zero = HahnSeries(trunc=t)
    return (x + zero).equals(y + zero, 0.0)


@pytest.mark.criterion("2")
@settings(max_examples=1000)
@given(_series(), _series(), _series())
def test_c2_ring_axioms(a, b, c):
    assert _agree(a + b, b + a)
    assert _agree((a + b) + c, a + (b + c))
    assert _agree(a * b, b * a)
    assert _agree((a * b) * c, a * (b * c))
    assert _agree(a * (b + c), a * b + a * c)


@pytest.mark.criterion("2")
@settings(max_examples=1000)
@given(_invertible())
def test_c2_inversion(a):
    inv = hahn.invert(a)
    prod = hahn.mul(a, inv)
    scale = sum(abs(c) for _, c in a.terms) * sum(abs(c) for _, c in inv.terms)
    assert inv.lead == -a.lead
    assert prod.equals(HahnSeries.unit(prod.trunc), 1e-12 * scale)


@pytest.mark.criterion("2")
def test_c2_planted_fit(record_property):
    planted = {E(1, 0): 1.5 - 0.5j, E(Fraction(3, 2), 0): -2.0, E(2, -1): 0.25j, E(2, 0): 1.0,
               E(Fraction(5, 2), 0): -0.75, E(3, 0): 3.0 + 1j}
    s = HahnSeries(planted)
    lams = [LogComplex(m, a) for a in (0.0, math.pi / 4) for m in np.geomspace(1e-5, 1e-1, 60)]
    fr = hahn.fit([(lam, hahn.evaluate(s, lam)[0]) for lam in lams], list(planted))
    err = max(abs(fr.coeff(e) - c) / abs(c) for e, c in planted.items())
    record_property("detail", f"1000 ring + 1000 inversion examples; planted 6-term fit rel err {err:.1e} (<1e-8)")
    assert err < 1e-8


# ---------------------------------------------------------------- 3. disc resonance constant

@pytest.mark.criterion("3")
@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_c3_disc_beta(R, record_property):
    m0 = Mode(2, 0, 0, 0)
    samples = le.sample_amplitude(Ball(2, 0, R), m0, m0, le.default_grid(1.0, 1e-8, 1e-4, 10))
    beta = le.fit_resonance_constant(samples)["beta"]
    err = abs(beta - (-math.log(R / 2)))
    record_property("detail", f"R={R}: |beta-(-log R/2)|={err:.1e}")
    assert err < 1e-6


# ---------------------------------------------------------------- 4. scalar order law

@pytest.mark.criterion("4")
@pytest.mark.parametrize("d", [3, 4, 5])
@pytest.mark.parametrize("l", [0, 1, 2])
def test_c4_leading_exponent(d, l, record_property):
    lams = np.geomspace(1e-6, 1e-2, 40)
    a = [bs.scalar_amplitude(d, "dirichlet", l, 1.0, x) for x in lams]
    est = hahn.estimate_leading_exponent_detail(list(zip(lams, a)))
    target = 2 * l + d - 2
    record_property("detail", f"d={d} l={l}: {est.raw_alpha:.4f} vs {target}")
    assert abs(est.raw_alpha - target) < 0.05


@pytest.mark.criterion("4")
def test_c4_d4_log_factor(record_property):
    # d = 4, l = 0: a = -(i pi/2) lam^2 + lam^4 (c1 log lam + c0) + ...; the log
    # factor sits in the first correction, found on the residual
    lams = np.geomspace(1e-7, 1e-3, 40)
    a = np.array([bs.scalar_amplitude(4, "dirichlet", 0, 1.0, x) for x in lams])
    fr = hahn.fit(list(zip(lams, a)), [(2, 0), (4, -1), (4, 0), (6, -2)])
    resid = a - fr.coeff(E(2, 0)) * lams ** 2
    lead = hahn.estimate_leading_exponent(list(zip(lams, resid)))
    record_property("detail", f"d=4 l=0 residual leading exponent {lead} (log power detected)")
    assert lead == E(4, -1)


# ---------------------------------------------------------------- 5. d=3 p=1 ball

@pytest.mark.criterion("5a")
def test_c5a_trace_P(record_property):
    data = ball_l2_basis(3, 1, 1.0)
    record_property("detail", f"tr P1 = {data.trace_P(1)!r}")
    assert data.trace_P(1) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.criterion("5b")
def test_c5b_trace_literal(record_property):
    lams = np.geomspace(1e-5, 1e-3, 25)
    tr = [bs.ball3d_p1_block(2, 1.0, x).trace(1) for x in lams]
    c1 = hahn.fit(list(zip(lams, tr)), [(1, 0), (2, 0), (3, 0)]).coeff(E(1, 0))
    target = -50j / 9
    rel = abs(c1 - target) / abs(target)
    record_property("detail", f"fitted lam-coefficient {c1:.6g} vs literal {target:.6g} (rel {rel:.2f}); "
                              f"independent prediction -2iR = {-2j:.6g}")
    assert rel < 1e-3


@pytest.mark.criterion("5c")
def test_c5c_eigenfunction_two_terms(record_property):
    g = Ball(3, 1, 1.0)
    m = Mode(3, 1, 1, 2)
    lams = le.default_grid(1.0, 1e-5, 1e-2, 10)
    rep = le.verify(le.predict_eigenfunction(3, 1, m, R=1.0), le.sample_shell_coefficient(g, m, lams), tol=1e-3)
    record_property("detail", f"<E,u1> two-term delta_rel {rep['delta_rel']:.1e}")
    assert rep["pass"] and rep["delta_rel"] < 1e-3


# ---------------------------------------------------------------- 6. d=2 p=1 disc, R=2

@pytest.mark.criterion("6")
def test_c6_resonance_entries_literal(record_property):
    lam, R = 1e-6, 2.0
    res = disc_resonance(R)
    blk = bs.disc_p1_block(3, R, lam)
    worst = worst_gamma = 0.0
    for m, am in res.a_psi.items():
        for n, an in res.a_psi.items():
            num = -2j * (math.pi / 2) * am * np.conj(an)
            val = blk.entry(n, m)
            lit = num / (-math.log(lam) + 1j * math.pi / 2)
            with_gamma = num / (-math.log(lam) + 1j * math.pi / 2 - EULER)
            worst = max(worst, abs(val - lit) / abs(lit))
            worst_gamma = max(worst_gamma, abs(val - with_gamma) / abs(with_gamma))
    record_property("detail", f"literal form rel err {100 * worst:.2f}% (<2%); with -gamma {100 * worst_gamma:.4f}%")
    assert worst < 0.02


@pytest.mark.criterion("6")
@pytest.mark.parametrize("lam", [1e-6, 1e-3, 0.5, 2.0])
def test_c6_potential_matches_direct(lam, record_property):
    a = bs.disc_p1_block(5, 2.0, lam).entries
    b = bs.disc_p1_potential_block(5, 2.0, lam).entries
    err = np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)))
    record_property("detail", f"potential vs 2x2 at lam={lam:g}: {err:.1e}")
    assert err < 1e-8


# ---------------------------------------------------------------- 7. unitarity and functional equations

GEOMS = [Ball(2, 0), Ball(2, 0, bc="neumann"), Ball(2, 1), Ball(2, 2), Ball(3, 0), Ball(3, 0, bc="neumann"),
         Ball(3, 1), Ball(3, 2), Ball(3, 3), Ball(4, 0), Ball(5, 0, bc="neumann")]
LAMS7 = [1e-4, 1e-2, 0.3, 1.0, 5.0]


@pytest.mark.criterion("7")
@pytest.mark.parametrize("geom", GEOMS, ids=lambda g: f"d{g.d}p{g.p}{g.bc[0]}")
def test_c7_unitarity_and_functional_equation(geom, record_property):
    lmax = 5 if geom.d <= 3 else 3
    u = fe = 0.0
    for lam in LAMS7:
        lam = LogComplex(lam)
        S = bs.scattering_block(geom, lam, lmax)
        Sm = bs.scattering_block(geom, lam.rotate_pi(), lmax)
        T = np.diag([(-1.0) ** m.l for m in S.modes])
        rhs = Sm.S if geom.d % 2 == 1 else 2 * np.eye(len(S.modes)) - Sm.S
        inner = S.degrees() <= lmax - (0 if geom.scalar_bc else 2)
        u = max(u, S.unitarity_defect())
        fe = max(fe, np.max(np.abs((S.S @ T @ rhs - T)[np.ix_(inner, inner)])))
    record_property("detail", f"d{geom.d}p{geom.p}{geom.bc[0]}: unitarity {u:.1e}, functional eq {fe:.1e}")
    assert u < 1e-8 and fe < 1e-8


# ---------------------------------------------------------------- 8. BEM

@pytest.mark.criterion("8")
def test_c8_disc_far_field(record_property):
    lmax = 6
    B = bem2d.bem_block(bem2d.circle(1.0), 1.0, lmax, N=256)
    ref = bs.scattering_block(Ball(2, 0, 1.0), 1.0, lmax).entries
    err = np.max(np.abs(B.entries - ref)) / np.max(np.abs(ref))
    record_property("detail", f"disc far field rel err {err:.1e} (<1e-6)")
    assert err < 1e-6


@pytest.mark.criterion("8")
def test_c8_ellipse_capacity(record_property):
    cap, beta_cap = bem2d.laplace_capacity(bem2d.ellipse(2, 1))
    record_property("detail", f"capacity {cap:.12f}")
    assert abs(cap - 1.5) < 1e-8


@pytest.mark.criterion("8")
def test_c8_beta_cross_check(record_property):
    curve = bem2d.ellipse(2, 1)
    m0 = Mode(2, 0, 0, 0)
    lams = np.geomspace(1e-6, 1e-3, 25)
    a = [bem2d.far_field_to_amplitude(bem2d.solve_dirichlet(curve, x, {m0: 1.0}, N=128), 0, in_modes=[m0]).entries[0, 0]
         for x in lams]
    beta_fit = le.fit_resonance_constant(list(zip(lams, a)))["beta"]
    beta_cap = bem2d.laplace_capacity(curve)[1]
    record_property("detail", f"beta scattering {beta_fit:.8f} vs capacity {beta_cap:.8f}")
    assert abs(beta_fit - beta_cap) < 1e-3


# ---------------------------------------------------------------- 9. spectral shift

@pytest.mark.criterion("9")
def test_c9_ball_p1(record_property):
    rep = ss.fit_low_energy(Ball(3, 1, 1.0), np.geomspace(1e-6, 1e-3, 30))
    within = abs(rep["ratio"] - 1) < 0.01
    record_property("detail", f"d3p1 jump {rep['jump']}; slope fitted {rep['alpha_fitted']:.6f} vs predicted "
                              f"{rep['alpha_predicted']:.6f}, ratio {rep['ratio']:.4f} "
                              f"({'within 1%' if within else 'reported, hypothesis mode'})")
    assert rep["jump"] == 1
    # the criterion accepts either agreement within 1% or a reported discrepancy ratio
    assert within or math.isfinite(rep["ratio"])


@pytest.mark.criterion("9")
def test_c9_disc_p1_jump(record_property):
    jump = ss.jump_at_zero(Ball(2, 1))
    record_property("detail", f"d2p1 jump {jump}")
    assert jump == 1


# ---------------------------------------------------------------- 10. Jacobi-Anger and far field

@pytest.mark.criterion("10")
@pytest.mark.parametrize("d,p", [(2, 0), (2, 1), (3, 0), (3, 1), (4, 0)])
def test_c10_jacobi_anger(d, p, record_property):
    rng = np.random.default_rng(11)
    g = {m: rng.normal() for m in ModeSet(d, p, 3).modes}
    worst = 0.0
    for lr in (0.5, 3.0, 12.0):
        x = rng.normal(size=d)
        x *= lr / np.linalg.norm(x)
        scale = max(1.0, np.max(np.abs(hm.plane_wave_integral(d, g, 1.0, x))))
        worst = max(worst, np.max(np.abs(hm.jacobi_anger_defect(d, g, 1.0, x))) / scale)
    record_property("detail", f"JA d{d}p{p} {worst:.1e}")
    assert worst < 1e-10


@pytest.mark.criterion("10")
@pytest.mark.parametrize("geom", [Ball(2, 0), Ball(3, 0), Ball(2, 1), Ball(3, 1)], ids=lambda g: f"d{g.d}p{g.p}")
def test_c10_far_field(geom, record_property):
    d, lam, r = geom.d, 1.0, 300.0
    lmax = 4
    blk = bs.scattering_block(geom, lam, lmax + 2)
    ms = ModeSet(d, geom.p, lmax + 2)
    rng = np.random.default_rng(5)
    th = rng.normal(size=(6, d))
    th /= np.linalg.norm(th, axis=1)[:, None]
    worst = 0.0
    for phi in hm.basis(d, geom.p, 1) + hm.basis(d, geom.p, 2):
        Ev = bs.eigenfunction_eval(phi, lam, r * th, geom, block=blk)
        v = ms.vector({phi: 1.0}) + ms.vector(blk.apply({phi: 1.0}))
        psi = np.einsum("a,nac->nc", v * hm.tau_coeffs(ms), hm.modeset_values(ms, th))
        ph = cmath.exp(1j * math.pi * (d - 1) / 4)
        inc = ph * cmath.exp(-1j * lam * r) * phi.values(th)
        out = cmath.exp(1j * lam * r) / ph * psi
        approx = r ** ((1 - d) / 2) * (inc + out)
        scale = r ** ((1 - d) / 2) * (np.max(np.abs(inc)) + np.max(np.abs(out)))
        worst = max(worst, np.max(np.abs(Ev - approx)) / scale)
    record_property("detail", f"far field d{d}p{geom.p} {worst:.1e} (bound {5 / (lam * r):.1e})")
    assert worst <= 5 / (lam * r)
