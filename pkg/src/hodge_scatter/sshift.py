"""Birman-Krein spectral shift function for ball/disc obstacles.

``eta(mu) = (1/2 pi i) int_0^{sqrt mu} tr(S^* S') dlam``.  For a diagonal
channel ``S = e^{2 i delta}`` this integrates exactly to ``delta(sqrt mu) - delta(0+)``,
so ``eta = (1/pi) sum_channels multiplicity * delta(sqrt mu)`` with phases
continued from ``delta(0+) = 0``.  The total ``xi = beta_p + beta_res + eta`` for
``mu > 0`` and ``xi = 0`` for ``mu < 0``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gamma as gamma_fn

from . import hahn
from .ball_scatter import Ball, Channel, channels, phase_shift
from .errors import ConfigurationError, DomainError, UnsupportedError
from .harmonic_forms import ball_l2_basis

__all__ = [
    "SpectralShiftSample",
    "channel_list",
    "eta",
    "eta_curve",
    "xi",
    "xi_curve",
    "jump_at_zero",
    "predicted_alpha",
    "fit_low_energy",
    "to_csv",
]

MU_MAX = 25.0
CHANNEL_TOL = 1e-10


@dataclass
class SpectralShiftSample:
    mu: float
    eta: float
    xi: float
    per_channel: dict = field(default_factory=dict)
    lmax_used: int = 0


def channel_list(geom: Ball, lmax: int) -> list:
    """Diagonal channels up to degree ``lmax``.

    Relative 2-forms on the 3-ball are the Hodge duals of absolute 1-forms; their
    channels are (radial: Neumann), (TE patterns: TM amplitude), (TM patterns:
    TE amplitude), which carry the same phases as the dual absolute channels.
    """
    if geom.d == 3 and geom.p == 2:
        out = []
        for l in range(lmax + 1):
            out.append(Channel("scalar-neumann", l, 3, geom.R, 2 * l + 1))
            if l >= 1:
                out.append(Channel("tm", l, 3, geom.R, 2 * l + 1))
                out.append(Channel("te", l, 3, geom.R, 2 * l + 1))
        return out
    return channels(geom, lmax)


def _lam_grid(targets: np.ndarray, R: float) -> np.ndarray:
    """Increasing grid from near 0 through every target, fine enough to unwrap phases."""
    top = float(np.max(targets))
    lo = min(1e-9, 1e-3 * float(np.min(targets)))
    g1 = np.geomspace(lo, max(top, lo * 10), 200)
    step = 0.02 / max(R, 1e-3)
    g2 = np.linspace(0.0, top, int(math.ceil(top / step)) + 2)[1:]
    grid = np.unique(np.concatenate([g1, g2, targets]))
    return grid[(grid > 0) & (grid <= top)]


def _channel_phases(geom: Ball, chans: list, grid: np.ndarray) -> np.ndarray:
    return np.array([phase_shift(c, grid) for c in chans])


def eta_curve(geom: Ball, mus: Sequence[float], lmax: int | None = None) -> list:
    """``eta`` on a set of ``mu`` values, with adaptive channel truncation.

    Without ``lmax`` the truncation grows until the last channel degree contributes
    less than ``1e-10`` at the largest ``mu``.
    """
    mus = np.asarray(mus, dtype=float)
    if np.any(mus > MU_MAX):
        raise DomainError(f"mu must be <= {MU_MAX}")
    pos = mus > 0
    out = [SpectralShiftSample(float(m), 0.0, 0.0, {}, 0) for m in mus]
    if not np.any(pos):
        return out
    lams = np.sqrt(mus[pos])
    grid = _lam_grid(lams, geom.R)
    idx = np.searchsorted(grid, lams)
    adaptive = lmax is None
    L = lmax if lmax is not None else max(4, int(math.ceil(2 * grid[-1] * geom.R)) + 4)
    while True:
        chans = channel_list(geom, L)
        ph = _channel_phases(geom, chans, grid)
        mult = np.array([c.multiplicity for c in chans], dtype=float)
        contrib = mult[:, None] * ph[:, idx] / math.pi
        top = np.array([c.l == L for c in chans])
        tail = float(np.max(np.abs(contrib[top].sum(axis=0)))) if np.any(top) else 0.0
        if not adaptive or tail < CHANNEL_TOL or L > 200:
            break
        L += 4
    total = contrib.sum(axis=0)
    for k, j in enumerate(np.nonzero(pos)[0]):
        per = {f"{c.kind}:{c.l}": float(contrib[i, k]) for i, c in enumerate(chans)}
        out[j] = SpectralShiftSample(float(mus[j]), float(total[k]), 0.0, per, L)
    return out


def eta(geom: Ball, mu: float, lmax: int | None = None) -> float:
    if mu == 0:
        return 0.0
    return eta_curve(geom, [mu], lmax)[0].eta


def jump_at_zero(geom: Ball) -> int:
    """``beta_p + beta_res``: relative L^2-Betti number plus the d=2, p=1 resonance count."""
    data = ball_l2_basis(geom.d, geom.p, geom.R)
    beta_res = 1 if (geom.d == 2 and geom.p == 1) else 0
    return data.relative_betti + beta_res


def xi_curve(geom: Ball, mus: Sequence[float], lmax: int | None = None) -> list:
    jump = jump_at_zero(geom)
    samples = eta_curve(geom, mus, lmax)
    for s in samples:
        s.xi = jump + s.eta if s.mu > 0 else 0.0
    return samples


def xi(geom: Ball, mu: float, lmax: int | None = None) -> float:
    if mu <= 0:
        return 0.0
    return xi_curve(geom, [mu], lmax)[0].xi


def predicted_alpha(geom: Ball, p: int | None = None) -> float | None:
    """``alpha_p``: ``-(2^{1-d} d^2 / Gamma((d-2)/2)^2) tr P^{(1)}`` for ``p <= 1``, 0 for ``p > 1``.

    ``None`` when the harmonic 1-form data of the geometry is not available.
    """
    d = geom.d
    p = geom.p if p is None else p
    if p > 1:
        return 0.0
    if d == 2:
        return 0.0  # 1/Gamma(0)^2 = 0
    try:
        data = ball_l2_basis(d, 1, geom.R)
    except UnsupportedError:
        return None
    trP = data.trace_P(1) if data.basis else 0.0
    return float(-(2.0 ** (1 - d)) * d * d / gamma_fn((d - 2) / 2) ** 2 * trP)


def fit_low_energy(geom: Ball, mu_grid: Sequence[float], lmax: int | None = None) -> dict:
    """Fit ``xi(mu) - beta_p - beta_res`` against ``mu^{(d-2)/2}`` plus remainder probes.

    Returns the fitted leading exponent (in ``mu``), the fitted and
    predicted ``alpha_p`` and their ratio.  For ``p = 0`` the ``p = 1``
    prediction is reported alongside (both constants are listed, no identity
    between them is asserted).
    """
    mus = np.asarray(mu_grid, dtype=float)
    if mus.size < 8 or np.any(mus <= 0):
        raise ConfigurationError("mu grid needs >= 8 positive points")
    d = geom.d
    samples = xi_curve(geom, mus, lmax)
    jump = jump_at_zero(geom)
    vals = np.array([s.xi - jump for s in samples])
    lams = np.sqrt(mus)
    pairs = list(zip(lams, vals))
    if d == 2:
        exps = [(0, 1), (0, 2), (0, 3), (2, 0)]
        lead = (0, 1)
    else:
        a = d - 2
        exps = [(a, 0), (a + 1, 0), (a + 2, 0)]
        if d == 4:
            exps.insert(1, (a + 2, -1))
        lead = (a, 0)
    fr = hahn.fit(pairs, exps)
    alpha_fit = float(np.real(fr.coeff(lead)))
    try:
        # exponent in mu (the lam-range is only half as many decades)
        est = hahn.estimate_leading_exponent_detail(list(zip(mus, vals)))
        exp_fit = {"variable": "mu", "exponent": est.exponent.to_json(), "raw_alpha": est.raw_alpha,
                   "predicted": [str(Fraction(d - 2, 2)), 0] if d > 2 else None}
    except Exception as exc:  # report rather than abort: the fit itself is still meaningful
        exp_fit = {"exponent": None, "error": str(exc)}
    alpha_pred = predicted_alpha(geom)
    report = {
        "geometry": geom.to_json(),
        "jump": jump,
        "fitted_exponent": exp_fit,
        "alpha_fitted": alpha_fit,
        "alpha_predicted": None if alpha_pred is None else float(alpha_pred),
        "ratio": (alpha_fit / alpha_pred) if alpha_pred else None,
        "fit_residual": fr.residual,
        "mu_range": [float(mus.min()), float(mus.max())],
        "lmax_used": max(s.lmax_used for s in samples),
    }
    if geom.p == 0 and d >= 3:
        a1 = predicted_alpha(geom, p=1)
        report["alpha_predicted_p1"] = None if a1 is None else float(a1)
    return report


def to_csv(samples: list) -> str:
    lines = ["mu,eta,xi,lmax_used"]
    for s in samples:
        lines.append(f"{s.mu:.17g},{s.eta:.17g},{s.xi:.17g},{s.lmax_used}")
    return "\n".join(lines) + "\n"
