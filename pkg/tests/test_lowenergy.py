import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hodge_scatter import harmonics as hm
from hodge_scatter import lowenergy as le
from hodge_scatter.ball_scatter import Ball, scattering_block
from hodge_scatter.errors import ConfigurationError
from hodge_scatter.hahn import HahnExponent, HahnSeries
from hodge_scatter.harmonic_forms import ball_l2_basis, disc_resonance
from hodge_scatter.harmonics import Mode, ModeSet
from hodge_scatter.logcx import LogComplex

U1_MODES = [Mode(3, 1, 1, 2), Mode(3, 1, 1, 3), Mode(3, 1, 1, 7)]  # modes carrying a_1 != 0


def test_constant_C_examples():
    assert_allclose(le.constant_C(2, 2), -math.sqrt(math.pi / 32), rtol=1e-15)
    assert_allclose(le.constant_C(3, 0), 2.0, rtol=1e-15)
    assert_allclose(le.constant_C(3, 1), -2j / 3, rtol=1e-15)
    assert_allclose(abs(le.constant_C(2, 1)) ** 2, math.pi / 2, rtol=1e-15)
    with pytest.raises(ConfigurationError):
        le.constant_C(1, 0)


def test_constant_C_matches_bessel_leading_term():
    # C_{d,l} is the small-z coefficient of (-i)^l j_{d,l}(z) z^{-l}, times 2
    from hodge_scatter.specfun import sph_j

    for d in (2, 3, 4, 5):
        for l in range(4):
            z = 1e-6
            val = 2 * (-1j) ** l * complex(sph_j(d, l, z)) / z**l
            assert_allclose(val, le.constant_C(d, l), rtol=1e-9)


def test_predicted_series_below_remainder():
    with pytest.raises(ConfigurationError):
        le.PredictedExpansion({}, HahnSeries({(2, 0): 1.0}), HahnExponent(1, 0))


def test_d3_scalar_prediction_is_remainder_only():
    for l, ln in [(0, 0), (1, 1), (2, 0)]:
        pr = le.predict_amplitude(3, 0, hm.basis(3, 0, l)[0], hm.basis(3, 0, ln)[0])
        assert pr.series.exponents() == []
        assert pr.remainder == HahnExponent(l + ln + 1, 0)


def test_d3_p1_trace_prediction():
    for R in (0.5, 1.0, 2.0):
        tr = sum(le.predict_amplitude(3, 1, m, m, R=R).series.coeff(HahnExponent(1, 0)) for m in hm.basis(3, 1, 1))
        assert_allclose(tr, -2j * R, rtol=1e-14)


def test_d2_p1_resonance_prediction():
    res = disc_resonance(2.0)
    m = list(res.a_psi)[0]
    pr = le.predict_amplitude(2, 1, m, m, res=res, R=2.0)
    assert_allclose(pr.reciprocal_scale, -2j * (math.pi / 2) * 0.5)
    assert_allclose(pr.reciprocal.coeff(HahnExponent(0, -1)), 1.0)
    assert_allclose(pr.reciprocal.coeff(HahnExponent(0, 0)), 1j * math.pi / 2 - le.EULER_GAMMA)
    with pytest.raises(ConfigurationError):
        le.predict_amplitude(2, 1, m, m, R=2.0)


def test_d3_p1_eigenfunction_prediction():
    R = 1.5
    m = U1_MODES[0]
    a1 = ball_l2_basis(3, 1, R).a_vector(m)[0]
    pr = le.predict_eigenfunction(3, 1, m, R=R)
    C = le.constant_C(3, 1)
    assert_allclose(pr.series.coeff(HahnExponent(0, 0)), -3 * C * a1)
    assert_allclose(pr.series.coeff(HahnExponent(1, 0)), 3j * C * R * a1)


def test_d5_eigenfunction_prediction_vanishes():
    from fractions import Fraction

    for l in range(3):
        pr = le.predict_eigenfunction(5, 0, hm.basis(5, 0, l)[0], observable="point", point=[2.0, 0, 0, 0, 0])
        assert pr.series.exponents() == []
        assert pr.remainder == HahnExponent(Fraction(2 * l + 5 - 5, 2) + 2, 0)  # lam^{l+2}


def test_default_grid():
    g = le.default_grid(2.0)
    assert len(g) == 281
    assert_allclose(g[0].modulus, 5e-9) and assert_allclose(g[-1].modulus, 5e-2)
    assert all(l.arg == 0 for l in g)
    assert le.default_grid(1.0, arg=math.pi / 4)[3].arg == math.pi / 4


def test_verify_d3_scalar_leading_term():
    R = 1.3
    m = Mode(3, 0, 0, 0)
    pred = le.PredictedExpansion({"observable": "amplitude"}, HahnSeries({(1, 0): -2j * R}, trunc=HahnExponent(2, 0)),
                                 HahnExponent(2, 0))
    samples = le.sample_amplitude(Ball(3, 0, R), m, m, le.default_grid(R, 1e-6, 1e-2, 10))
    rep = le.verify(pred, samples)
    assert rep["pass"] and rep["delta_rel"] < 1e-6


def test_verify_null_branch():
    m1 = hm.basis(3, 0, 1)[0]
    pr = le.predict_amplitude(3, 0, m1, m1)
    samples = le.sample_amplitude(Ball(3, 0), m1, m1, le.default_grid(1.0, 1e-4, 1e-1, 8))
    assert le.verify(pr, samples)["pass"]
    # a remainder claim one order too strong must fail
    strong = le.PredictedExpansion({}, HahnSeries(trunc=HahnExponent(5, 0)), HahnExponent(5, 0))
    assert not le.verify(strong, samples)["pass"]


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_verify_disc_resonance(R):
    res = disc_resonance(R)
    m0 = Mode(2, 0, 0, 0)
    pr = le.predict_amplitude(2, 0, m0, m0, res=res, R=R)
    samples = le.sample_amplitude(Ball(2, 0, R), m0, m0, le.default_grid(1.0, 1e-8, 1e-4, 10))
    rep = le.verify(pr, samples, tol=1e-6)
    assert rep["pass"]
    assert abs(rep["beta_fitted"] - res.beta) < 1e-6
    assert abs(le.fit_resonance_constant(samples)["beta"] - res.beta) < 1e-6


def test_verify_disc_p1_resonance_entries():
    res = disc_resonance(2.0)
    g = Ball(2, 1, 2.0)
    for m in res.a_psi:
        pr = le.predict_amplitude(2, 1, m, m, res=res, R=2.0)
        rep = le.verify(pr, le.sample_amplitude(g, m, m, le.default_grid(1.0, 1e-8, 1e-4, 10)), tol=1e-6)
        assert rep["pass"]


def test_verify_d3_p1_amplitude_and_eigenfunction():
    g = Ball(3, 1, 1.0)
    m = U1_MODES[0]
    lams = le.default_grid(1.0, 1e-5, 1e-2, 10)
    rep = le.verify(le.predict_amplitude(3, 1, m, m, R=1.0), le.sample_amplitude(g, m, m, lams), tol=1e-3)
    assert rep["pass"]
    rep = le.verify(le.predict_eigenfunction(3, 1, m, R=1.0), le.sample_shell_coefficient(g, m, lams), tol=1e-3)
    assert rep["pass"]


def test_verify_d2_p1_point_value():
    res = disc_resonance(2.0)
    m = Mode(2, 1, 0, 0)
    pr = le.predict_eigenfunction(2, 1, m, res=res, R=2.0, observable="point", point=[3.0, 1.0])
    sm = le.sample_point_value(Ball(2, 1, 2.0), m, le.default_grid(1.0, 1e-12, 1e-6, 5), [3.0, 1.0])
    rep = le.verify(pr, sm, tol=1e-6)
    assert rep["pass"]


def test_even_dimension_sector_uniformity():
    R = 1.0
    m0 = Mode(2, 0, 0, 0)
    betas = []
    for arg in (0.0, math.pi / 4):
        sm = le.sample_amplitude(Ball(2, 0, R), m0, m0, le.default_grid(1.0, 1e-8, 1e-4, 10, arg=arg))
        betas.append(le.fit_resonance_constant(sm)["beta"])
    assert abs(betas[0] - betas[1]) < 1e-6


@pytest.mark.parametrize("d", [3, 4, 5])
def test_scalar_operator_bound(d):
    # p = 0: every P^(l) vanishes, so max |A entries| = O(lam^{d-2})
    ratios = []
    for lam in (1e-1, 1e-2, 1e-3, 1e-4):
        blk = scattering_block(Ball(d, 0), lam, 4)
        ratios.append(np.max(np.abs(blk.entries)) / lam ** (d - 2))
    assert max(ratios) <= 10 * ratios[0]


def test_free_space_fingerprint_d2():
    # no obstacle (A = 0): lam^{-1/2} E_lam(Phi0) -> sqrt(2 pi) Phi0
    m0 = Mode(2, 0, 0, 0)
    x = np.array([[0.7, 0.4]])
    for lam in (1e-6, 1e-9):
        val = hm.synth_j(LogComplex(lam), {m0: 1.0}, x)[0, 0] / math.sqrt(lam)
        assert_allclose(val, math.sqrt(2 * math.pi) * m0.values(np.array([[1.0, 0]]))[0, 0], rtol=1e-10)


def test_report_json_shape():
    m = Mode(3, 0, 0, 0)
    pred = le.PredictedExpansion({"observable": "amplitude"}, HahnSeries({(1, 0): -2j}, trunc=HahnExponent(2, 0)),
                                 HahnExponent(2, 0))
    rep = le.verify(pred, le.sample_amplitude(Ball(3, 0), m, m, le.default_grid(1.0, 1e-5, 1e-2, 4)))
    assert set(rep) >= {"target", "predicted", "fitted", "delta_rel", "remainder_fit", "pass"}
    import json
    json.dumps(rep)
