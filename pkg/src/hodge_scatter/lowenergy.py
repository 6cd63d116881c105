"""Predicted low-energy expansions and their verification against computed data.

Predictions are Hahn series in ``lam^alpha (-log lam)^{-beta}`` built from the
closed-form harmonic data; computed values come from :mod:`ball_scatter` on
geometric lambda grids.  ``verify`` fits the computed samples on the predicted
exponent set plus remainder probes and compares coefficients.

Observables:

* amplitude entries ``<A_lam Phi, Phi_nu>``;
* shell coefficients ``<E_lam(Phi), u_j>_shell / ||u_j||^2_shell`` of the
  generalized eigenfunction against the L^2 harmonic forms, with the shell
  ``R <= r <= r_out`` (finite region, so the pairing converges);
* point values of ``E_lam(Phi)``.

For the d = 2 zero resonance the amplitude is predicted in reciprocal form
``K / a(lam) = -log lam + i pi/2 + beta - gamma + ...`` and verified by fitting
the reciprocal, which is linear in the unknown constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import hahn
from . import harmonics as hm
from .ball_scatter import Ball, eigenfunction_eval, scattering_block
from .errors import ConfigurationError, IllConditionedError, UnsupportedError
from .hahn import HahnExponent, HahnSeries
from .harmonic_forms import HarmonicFormData, ResonanceData, ball_l2_basis, disc_resonance
from .harmonics import Mode
from .logcx import LogComplex, as_logcx

__all__ = [
    "EULER_GAMMA",
    "constant_C",
    "PredictedExpansion",
    "predict_amplitude",
    "predict_eigenfunction",
    "default_grid",
    "sample_amplitude",
    "sample_shell_coefficient",
    "sample_point_value",
    "shell_coefficient",
    "verify",
    "fit_resonance_constant",
]

EULER_GAMMA = float(np.euler_gamma)


def constant_C(d: int, l: int) -> complex:
    """``C_{d,l} = (-i)^l sqrt(2 pi) 2^{-(l + d/2 - 1)} / Gamma(l + d/2)``."""
    if d < 2 or l < 0:
        raise ConfigurationError("constant_C needs d >= 2, l >= 0")
    return (-1j) ** l * math.sqrt(2 * math.pi) * 2.0 ** (-(l + d / 2 - 1)) / math.gamma(l + d / 2)


def _remainder_step(d: int) -> HahnExponent:
    if d == 3:
        return HahnExponent(1, 0)
    if d == 4:
        return HahnExponent(2, -1)
    return HahnExponent(2, 0)


@dataclass
class PredictedExpansion:
    """Predicted Hahn expansion of one observable.

    ``series`` holds the explicit terms and ``remainder`` the order of the
    error term.  When ``reciprocal`` is set the prediction is
    ``reciprocal_scale / value = reciprocal + O(reciprocal_remainder)``.
    """

    target: dict
    series: HahnSeries
    remainder: HahnExponent
    reciprocal: HahnSeries | None = None
    reciprocal_scale: complex = 1.0
    reciprocal_remainder: HahnExponent | None = None
    notes: list = field(default_factory=list)

    def __post_init__(self):
        for e in self.series.exponents():
            if not e < self.remainder:
                raise ConfigurationError(f"series exponent {e} is not below the remainder {self.remainder}")

    def to_json(self) -> dict:
        out = {"target": self.target, "series": self.series.to_json(), "remainder": self.remainder.to_json()}
        if self.reciprocal is not None:
            out["reciprocal"] = self.reciprocal.to_json()
            out["reciprocal_scale"] = [float(np.real(self.reciprocal_scale)), float(np.imag(self.reciprocal_scale))]
        if self.notes:
            out["notes"] = self.notes
        return out


def _resonance_linear(beta: float, K: int = 6) -> HahnSeries:
    """``-log lam + i pi/2 + beta - gamma`` as a Hahn series."""
    return HahnSeries({(0, -1): 1.0, (0, 0): 1j * math.pi / 2 + beta - EULER_GAMMA},
                      trunc=HahnExponent(Fraction(0), K), singular=True)


def _data_for(d: int, p: int, R: float, data):
    if data is not None:
        return data
    try:
        return ball_l2_basis(d, p, R)
    except UnsupportedError:
        raise


def predict_amplitude(d: int, p: int, phi: Mode, phi_nu: Mode, data: HarmonicFormData | None = None,
                      res: ResonanceData | None = None, R: float = 1.0, n_log_terms: int = 6) -> PredictedExpansion:
    """Prediction for ``<A_lam Phi, Phi_nu>`` on the ball/disc.

    Leading term ``-(i/2)(d-2+2l)(d-2+2l_nu) C_{d,l} conj(C_{d,l_nu}) sum_j a_j(Phi) conj(a_j(Phi_nu))
    lam^{l+l_nu+d-4}``; when that sum vanishes the prediction is the bound
    ``O(lam^{l+l_nu+d-2})``.  In d = 2 the degree-0 scalar (p=0) and the
    degree-1 (p=1) channels carry the zero-resonance factor.
    """
    l, ln = phi.l, phi_nu.l
    target = {"observable": "amplitude", "d": d, "p": p, "phi": phi.to_json(), "phi_nu": phi_nu.to_json(), "R": R}
    if d == 2:
        if res is None:
            if (p == 0 and l == ln == 0) or (p == 1 and l == ln == 1):
                raise ConfigurationError("missing resonance data for d=2 resonance channel")
        if p == 0 and l == ln == 0 and phi == phi_nu:
            lin = _resonance_linear(res.beta)
            scale = math.pi / 1j
            series = hahn.invert(lin, trunc=HahnExponent(0, n_log_terms)) * scale
            return PredictedExpansion(target, series, HahnExponent(0, n_log_terms), reciprocal=lin,
                                      reciprocal_scale=scale, reciprocal_remainder=HahnExponent(2, -1))
        if p == 1 and l == ln == 1:
            apsi = res.a_psi
            k = -2j * abs(constant_C(2, 1)) ** 2 * apsi.get(phi, 0.0) * np.conj(apsi.get(phi_nu, 0.0))
            if k == 0:
                return PredictedExpansion(target, HahnSeries(trunc=HahnExponent(2, -1)), HahnExponent(2, -1),
                                          notes=["resonance coefficient vanishes for this pair"])
            lin = _resonance_linear(res.beta)
            series = hahn.invert(lin, trunc=HahnExponent(0, n_log_terms)) * k
            return PredictedExpansion(target, series, HahnExponent(0, n_log_terms), reciprocal=lin,
                                      reciprocal_scale=k, reciprocal_remainder=HahnExponent(2, -1))
        rem = HahnExponent(l + ln, 0) if (l + ln) > 0 else HahnExponent(0, 1)
        return PredictedExpansion(target, HahnSeries(trunc=rem), rem)
    data = _data_for(d, p, R, data)
    s = complex(np.vdot(data.a_vector(phi_nu), data.a_vector(phi))) if data.basis else 0j
    lead_alpha = l + ln + d - 4
    if data.bc != "relative" or s == 0:
        rem = HahnExponent(l + ln + d - 2, 0)
        return PredictedExpansion(target, HahnSeries(trunc=rem), rem)
    c = -0.5j * (d - 2 + 2 * l) * (d - 2 + 2 * ln) * constant_C(d, l) * np.conj(constant_C(d, ln)) * s
    rem = HahnExponent(lead_alpha, 0) + _remainder_step(d)
    return PredictedExpansion(target, HahnSeries({(lead_alpha, 0): c}, trunc=rem), rem)


def predict_eigenfunction(d: int, p: int, phi: Mode, data: HarmonicFormData | None = None,
                          res: ResonanceData | None = None, R: float = 1.0, observable: str = "u",
                          j: int = 0, point=None, component: int = 0) -> PredictedExpansion:
    """Prediction for an observable of ``E_lam(Phi)``.

    ``observable='u'``: shell coefficient against ``u_j``,
    ``-(d-2+2l) C_{d,l} lam^{l+(d-5)/2} [a_j(Phi) - i lam (a^{(1)} a(Phi))_j] + ...`` (d = 3).
    ``observable='point'``: component ``component`` of ``E_lam(Phi)(point)``.
    """
    l = phi.l
    target = {"observable": observable, "d": d, "p": p, "phi": phi.to_json(), "R": R}
    if d == 2:
        if p == 1 and l == 0 and observable == "point":
            if res is None:
                raise ConfigurationError("missing resonance data for d=2, p=1")
            x = np.atleast_2d(np.asarray(point, dtype=float))
            vec = phi.values(np.array([[1.0, 0.0]]))[0]  # constant 1-form components
            val = math.sqrt(2 * math.pi) * res.varphi(vec)(x)[0, component]
            target.update(point=list(map(float, x[0])), component=component)
            rem = HahnExponent(Fraction(1, 2), 1)
            return PredictedExpansion(target, HahnSeries({(Fraction(1, 2), 0): val}, trunc=rem), rem)
        raise UnsupportedError(f"no eigenfunction prediction for d=2, p={p}, l={l}, observable={observable}")
    data = _data_for(d, p, R, data)
    alpha = Fraction(2 * l + d - 5, 2)
    step = _remainder_step(d)
    C = constant_C(d, l)
    k = d - 2 + 2 * l
    if observable == "u":
        if not data.basis:
            raise ConfigurationError("no harmonic forms to pair with")
        av = data.a_vector(phi)
        lead = -k * C * av[j]
        terms = {}
        if lead != 0:
            terms[(alpha, 0)] = lead
        if d == 3:
            second = 1j * k * C * (data.a_matrix(1) @ av)[j]
            if second != 0:
                terms[(alpha + 1, 0)] = second
            rem = HahnExponent(alpha + 2, 0)
        else:
            rem = HahnExponent(alpha, 0) + step
        target["j"] = j
        return PredictedExpansion(target, HahnSeries(terms, trunc=rem), rem,
                                  notes=["second coefficient +i(d-2+2l) C (a^(1) a(Phi))_j; "
                                         "the opposite sign is reported alongside"])
    if observable == "point":
        x = np.atleast_2d(np.asarray(point, dtype=float))
        target.update(point=list(map(float, x[0])), component=component)
        av = data.a_vector(phi) if data.basis and data.bc == "relative" else np.zeros(0)
        val = -k * C * sum(a * u(x)[0, component] for a, u in zip(av, data.basis)) if av.size else 0
        rem = HahnExponent(alpha, 0) + step
        terms = {(alpha, 0): val} if val != 0 else {}
        return PredictedExpansion(target, HahnSeries(terms, trunc=rem), rem)
    raise ConfigurationError(f"unknown observable {observable!r}")


# --------------------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------------------

def default_grid(R: float = 1.0, lo: float = 1e-8, hi: float = 1e-1, per_decade: int = 40,
                 arg: float = 0.0) -> list:
    """Geometric lambda grid ``[lo, hi]/R`` with ``per_decade`` points per decade on ray ``arg``."""
    n = int(round(per_decade * math.log10(hi / lo))) + 1
    return [LogComplex(m, arg) for m in np.geomspace(lo / R, hi / R, n)]


def sample_amplitude(geom: Ball, phi: Mode, phi_nu: Mode, lams: Sequence, lmax: int | None = None) -> list:
    lmax = max(phi.l, phi_nu.l) if lmax is None else lmax
    out = []
    for lam in lams:
        lam = as_logcx(lam)
        blk = scattering_block(geom, lam, lmax)
        out.append((lam, blk.entry(phi_nu, phi)))
    return out


def _shell_quadrature(d: int, R: float, r_out: float, nr: int, lq: int):
    t, wt = np.polynomial.legendre.leggauss(nr)
    r = R + (r_out - R) * 0.5 * (t + 1)
    wr = (r_out - R) * 0.5 * wt * r ** (d - 1)
    pts, ws = hm.sphere_quadrature(d, lmax=lq)
    X = (r[:, None, None] * pts[None, :, :]).reshape(-1, d)
    W = (wr[:, None] * ws[None, :]).reshape(-1)
    return X, W


def shell_coefficient(field_values: np.ndarray, u_values: np.ndarray, W: np.ndarray) -> complex:
    num = np.einsum("n,nc,nc->", W, field_values, u_values.conj())
    den = np.einsum("n,nc,nc->", W, u_values, u_values.conj())
    return complex(num / den)


def sample_shell_coefficient(geom: Ball, phi: Mode, lams: Sequence, data: HarmonicFormData | None = None,
                             j: int = 0, r_out: float | None = None, nr: int = 24) -> list:
    """``<E_lam(Phi), u_j>_shell / ||u_j||^2_shell`` on ``R <= r <= r_out`` (default ``2R``)."""
    data = ball_l2_basis(geom.d, geom.p, geom.R) if data is None else data
    r_out = 2 * geom.R if r_out is None else r_out
    X, W = _shell_quadrature(geom.d, geom.R, r_out, nr, phi.l + 6)
    U = data.basis[j](X)
    out = []
    for lam in lams:
        lam = as_logcx(lam)
        E = eigenfunction_eval(phi, lam, X, geom)
        out.append((lam, shell_coefficient(E, U, W)))
    return out


def sample_point_value(geom: Ball, phi: Mode, lams: Sequence, point, component: int = 0) -> list:
    x = np.atleast_2d(np.asarray(point, dtype=float))
    return [(as_logcx(lam), complex(eigenfunction_eval(phi, lam, x, geom)[0, component])) for lam in lams]


# --------------------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------------------

def _probe_set(rem: HahnExponent, n: int = 2) -> list:
    return [rem + HahnExponent(k, 0) for k in range(n)]


def _series_values(series: HahnSeries, lams) -> np.ndarray:
    exps = series.exponents()
    if not exps:
        return np.zeros(len(lams), dtype=complex)
    X = hahn.design_matrix(lams, exps)
    return X @ np.array([series.coeff(e) for e in exps])


def _remainder_check(lams, resid: np.ndarray, rem: HahnExponent, scale: float, growth: float = 10.0,
                     noise: float = 1e-10) -> dict:
    """Is ``|resid| <= C |lam^alpha (-log lam)^{-beta}|`` on the grid?

    ``C`` is calibrated on the top decade of the grid; the check fails when the
    ratio grows by more than ``growth`` towards small lambda.  Residuals below
    ``noise * scale`` are treated as zero (roundoff floor).  The raw leading
    exponent of the residual is reported when it can be estimated.
    """
    floor = noise * max(scale, 1e-300)
    mags = np.maximum(np.abs(resid) - floor, 0.0)
    if np.max(mags) == 0.0:
        return {"exponent": None, "consistent": True, "note": "residual below roundoff floor"}
    bound = np.abs(hahn.design_matrix(lams, [rem])[:, 0])
    ratio = mags / bound
    mod = np.array([l.modulus for l in lams])
    top = ratio[mod >= mod.max() / 10]
    ok = bool(np.max(ratio) <= growth * max(np.max(top), 1e-300))
    out = {"exponent": None, "consistent": ok, "ratio_growth": float(np.max(ratio) / max(np.max(top), 1e-300))}
    try:
        est = hahn.estimate_leading_exponent_detail(list(zip(lams, resid)))
        out["exponent"] = est.exponent.to_json()
        out["raw_alpha"] = est.raw_alpha
    except Exception as exc:  # short grid or noisy residual: keep the magnitude verdict
        out["note"] = str(exc)
    return out


def verify(pred: PredictedExpansion, samples: Sequence, tol: float = 1e-4, probes: int = 2) -> dict:
    """Compare a prediction with computed ``[(lam, value)]`` samples.

    Returns the report ``{"target", "predicted", "fitted", "delta_rel",
    "remainder_fit", "pass"}``.  Reciprocal predictions are fitted on
    ``scale/value``; the fitted constant term is reported as ``beta`` too.
    """
    lams = [as_logcx(l) for l, _ in samples]
    y = np.array([complex(v) for _, v in samples])
    if len(lams) < 4:
        raise ConfigurationError("verify needs at least 4 samples")
    if pred.reciprocal is not None:
        z = pred.reciprocal_scale / y
        exps = pred.reciprocal.exponents() + _probe_set(pred.reciprocal_remainder, probes)
        try:
            fr = hahn.fit(list(zip(lams, z)), exps)
        except IllConditionedError:
            exps = pred.reciprocal.exponents()
            fr = hahn.fit(list(zip(lams, z)), exps)
        deltas = {}
        for e in pred.reciprocal.exponents():
            ref = pred.reciprocal.coeff(e)
            deltas[str(e.to_json())] = abs(fr.coeff(e) - ref) / max(abs(ref), 1e-300)
        c0 = fr.coeff(HahnExponent(0, 0))
        beta = float(np.real(c0) + EULER_GAMMA)
        resid = z - _series_values(pred.reciprocal, lams)
        remfit = _remainder_check(lams, resid, pred.reciprocal_remainder, float(np.max(np.abs(z))))
        dmax = max(deltas.values())
        return {
            "target": pred.target,
            "predicted": [pred.reciprocal.to_json()],
            "fitted": [fr.series().to_json()],
            "delta_rel": dmax,
            "deltas": deltas,
            "beta_fitted": beta,
            "remainder_fit": remfit,
            "pass": bool(dmax <= tol and remfit["consistent"]),
        }
    ser = pred.series
    exps = ser.exponents()
    scale = float(np.max(np.abs(y))) if y.size else 0.0
    if not exps:
        remfit = _remainder_check(lams, y, pred.remainder, 1.0)
        return {"target": pred.target, "predicted": [ser.to_json()], "fitted": [], "delta_rel": 0.0,
                "remainder_fit": remfit, "pass": bool(remfit["consistent"])}
    fit_exps = exps + [e for e in _probe_set(pred.remainder, probes) if e not in exps]
    try:
        fr = hahn.fit(list(zip(lams, y)), fit_exps)
    except IllConditionedError:
        fr = hahn.fit(list(zip(lams, y)), exps)
    deltas = {}
    for e in exps:
        ref = ser.coeff(e)
        deltas[str(e.to_json())] = abs(fr.coeff(e) - ref) / max(abs(ref), 1e-300)
    resid = y - _series_values(ser, lams)
    remfit = _remainder_check(lams, resid, pred.remainder, scale)
    dmax = max(deltas.values())
    rep = {
        "target": pred.target,
        "predicted": [ser.to_json()],
        "fitted": [fr.series().to_json()],
        "delta_rel": dmax,
        "deltas": deltas,
        "remainder_fit": remfit,
        "pass": bool(dmax <= tol and remfit["consistent"]),
    }
    return rep


def fit_resonance_constant(samples: Sequence, scale: complex = math.pi / 1j, n_log_terms: int = 4,
                           probes: Sequence = ((2, -1), (2, 0))) -> dict:
    """Fit ``beta`` from a d = 2 resonance amplitude.

    Fits ``scale / a(lam)`` against ``(-log lam)^{1}``, ``1``, the inverse log
    powers ``(-log lam)^{-k}``, ``k = 1..n_log_terms`` and the remainder probes,
    falling back to ``{(0,-1), (0,0)}`` plus probes when ill-conditioned.  The
    constant term equals ``i pi/2 + beta - gamma``.
    """
    lams = [as_logcx(l) for l, _ in samples]
    z = np.array([scale / complex(v) for _, v in samples])
    sets = [
        [(0, k) for k in range(-1, n_log_terms + 1)] + list(probes),
        [(0, -1), (0, 0)] + list(probes),
        [(0, -1), (0, 0)],
    ]
    last = None
    for exps in sets:
        try:
            fr = hahn.fit(list(zip(lams, z)), exps, max_condition=1e10)
            break
        except (IllConditionedError, ConfigurationError) as exc:
            last = exc
    else:
        raise last
    c0 = fr.coeff(HahnExponent(0, 0))
    return {
        "beta": float(np.real(c0) + EULER_GAMMA),
        "imag_const": float(np.imag(c0)),
        "log_coeff": complex(fr.coeff(HahnExponent(0, -1))),
        "exponents": [e.to_json() for e in fr.exponents],
        "residual": fr.residual,
        "condition": fr.condition,
    }
