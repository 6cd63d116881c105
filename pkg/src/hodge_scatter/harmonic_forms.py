"""Closed-form zero-energy data for ball and disc obstacles.

Contents:

* the square-integrable harmonic forms ``u_j`` on the exterior of the obstacle,
  their decaying multipole coefficients ``a_j(Phi_nu)``, the matrices
  ``a^{(l)}_{kj} = sum_{l_nu = l} a_k(Phi_nu) conj(a_j(Phi_nu))`` and the operators
  ``P^{(l)} f = sum_{kj} a^{(l)}_{kj} <f, u_j> u_k``;
* disc resonance data: ``g(Phi_0)``, ``beta``, ``psi(Phi_0) = d g(Phi_0)``,
  the forms ``phi(Phi)`` for constant 1-forms and ``G_1(Phi)`` for degree-1 scalars;
* the multipole-order filtration of the harmonic forms.

Only ``d = 3`` balls carry a nonzero relative 1-form: ``u_1 = sqrt(R/(4 pi)) dr/r^2``.
For ``(d, p) = (3, 2)`` the Hodge dual ``* u_1`` is returned as the absolute
2-form; the relative 2-form space of the ball exterior is zero, so its
``relative_betti`` is 0.

Hodge-star sign table (d = 3, Euclidean orientation):
``*dx = dy^dz``, ``*dy = -dx^dz``, ``*dz = dx^dy``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import harmonics as hm
from .errors import ConfigurationError, DomainError, UnsupportedError
from .harmonics import Mode, ModeSet, MultipoleExpansion

__all__ = [
    "HarmonicForm",
    "HarmonicFormData",
    "ResonanceData",
    "ball_l2_basis",
    "disc_resonance",
    "exterior_inner",
    "projection_apply",
    "projection_matrix_action",
    "order_filtration",
]


@dataclass
class HarmonicForm:
    """One basis form: a pointwise sampler and its (decay-only) multipole expansion."""

    name: str
    sampler: Callable[[np.ndarray], np.ndarray]
    multipole: MultipoleExpansion

    def __call__(self, x):
        return self.sampler(np.atleast_2d(np.asarray(x, dtype=float)))

    def a(self, mode: Mode) -> complex:
        """Decay coefficient ``a_j(Phi_nu)``."""
        return complex(self.multipole.decay.get(mode, 0.0))


@dataclass
class HarmonicFormData:
    """L^2 harmonic forms of the exterior of a ball/disc and derived matrices."""

    d: int
    p: int
    R: float
    basis: list
    bc: str = "relative"
    aMatrices: dict = field(default_factory=dict)
    order: dict = field(default_factory=dict)

    @property
    def relative_betti(self) -> int:
        return len(self.basis) if self.bc == "relative" else 0

    def a_vector(self, mode: Mode) -> np.ndarray:
        """``(a_1(Phi), ..., a_N(Phi))``."""
        return np.array([u.a(mode) for u in self.basis], dtype=complex)

    def a_matrix(self, l: int) -> np.ndarray:
        n = len(self.basis)
        return self.aMatrices.get(l, np.zeros((n, n)))

    def trace_P(self, l: int) -> float:
        """``tr P^{(l)} = tr a^{(l)}`` (the u_j are orthonormal)."""
        return float(np.real(np.trace(self.a_matrix(l))))

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "p": self.p,
            "radius": self.R,
            "bc": self.bc,
            "basis": [u.name for u in self.basis],
            "aMatrices": {str(l): [[[float(z.real), float(z.imag)] for z in row] for row in M]
                          for l, M in self.aMatrices.items()},
            "filtration": {k: v for k, v in self.order.get("m", {}).items()},
            "quotient_dims": {str(k): v for k, v in self.order.get("dims", {}).items()},
        }


def _a_matrices(basis: list, d: int, p: int, lmax: int) -> dict:
    out = {}
    for l in range(lmax + 1):
        modes = hm.basis(d, p, l)
        A = np.array([[sum(uk.a(m) * np.conj(uj.a(m)) for m in modes) for uj in basis] for uk in basis],
                     dtype=complex).reshape(len(basis), len(basis))
        if np.any(A != 0):
            out[l] = A
    return out


def _ball3_u1(R: float) -> HarmonicForm:
    c = math.sqrt(R / (4 * math.pi))

    def sampler(X):
        r = np.linalg.norm(X, axis=1)
        return c * X / r[:, None] ** 3  # c * theta / r^2 in Cartesian components

    # theta = sqrt(4 pi/3) sum_i Y_(i) dx_i with degree-1 basis order (z, x, y):
    # modes z.dz, x.dx, y.dy have idx 0*3+2, 1*3+0, 2*3+1.
    a = math.sqrt(R / 3.0)
    decay = {Mode(3, 1, 1, 2): complex(a), Mode(3, 1, 1, 3): complex(a), Mode(3, 1, 1, 7): complex(a)}
    return HarmonicForm("u1", sampler, MultipoleExpansion(3, 1, decay=decay, valid_from=R))


def _star_form(u: HarmonicForm) -> HarmonicForm:
    T = hm.star_tensor(3, 1)

    def sampler(X):
        return u.sampler(X) @ T.T

    St = hm.hodge_star_matrix(3, 1, 1)
    ms1, ms2 = ModeSet(3, 1, 1), ModeSet(3, 2, 1)
    v = ms1.vector(u.multipole.decay)
    decay = {m: complex(c) for m, c in zip(ms2.modes, St @ v) if c != 0}
    return HarmonicForm("*u1", sampler, MultipoleExpansion(3, 2, decay=decay, valid_from=u.multipole.valid_from))


def ball_l2_basis(d: int, p: int, R: float = 1.0) -> HarmonicFormData:
    """Orthonormal L^2 harmonic p-forms (relative BC) outside the ball/disc of radius R."""
    if R <= 0:
        raise DomainError("radius must be positive")
    if d < 2:
        raise UnsupportedError(f"unsupported geometry d={d}")
    if d == 2:
        if p not in (0, 1, 2):
            raise UnsupportedError(f"unsupported geometry d=2, p={p}")
        basis, bc = [], "relative"
    elif d == 3 and p == 1:
        basis, bc = [_ball3_u1(R)], "relative"
    elif d == 3 and p == 2:
        basis, bc = [_star_form(_ball3_u1(R))], "absolute"
    elif p in (1, d - 1):
        raise UnsupportedError(f"unsupported geometry: p={p} forms in d={d}")
    elif 0 <= p <= d:
        basis, bc = [], "relative"
    else:
        raise UnsupportedError(f"unsupported geometry d={d}, p={p}")
    data = HarmonicFormData(d, p, float(R), basis, bc=bc)
    data.aMatrices = _a_matrices(basis, d, p, 3) if basis else {}
    data.order = order_filtration(data)
    return data


# --------------------------------------------------------------------------------------
# L^2(exterior) pairing and P^{(l)}
# --------------------------------------------------------------------------------------

def exterior_inner(f: Callable, g: Callable, d: int, R: float, nr: int = 80, lmax: int = 8) -> complex:
    """``<f, g> = int_{|x|>R} f . conj(g) dx`` by Gauss-Legendre in ``t = R/r`` times sphere quadrature.

    ``f`` and ``g`` map Cartesian points (N, d) to components (N, k); the product
    must decay at least like ``r^{-d-eps}``.
    """
    t, wt = np.polynomial.legendre.leggauss(nr)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    pts, ws = hm.sphere_quadrature(d, lmax=lmax)
    total = 0j
    for tk, wk in zip(t, wt):
        r = R / tk
        jac = R / tk ** 2 * r ** (d - 1)  # dr = R/t^2 dt, volume r^{d-1}
        X = r * pts
        fv = np.asarray(f(X), dtype=complex)
        gv = np.asarray(g(X), dtype=complex)
        total += wk * jac * np.einsum("n,nc,nc->", ws, fv, gv.conj())
    return complex(total)


def projection_apply(data: HarmonicFormData, l: int, f: Callable, **quad) -> Callable:
    """``P^{(l)} f = sum_{kj} a^{(l)}_{kj} <f, u_j> u_k`` returned as a sampler."""
    A = data.a_matrix(l)
    if len(data.basis) == 0 or not np.any(A):
        return lambda X: np.zeros((np.atleast_2d(X).shape[0], math.comb(data.d, data.p)), dtype=complex)
    coef = np.array([exterior_inner(f, u.sampler, data.d, data.R, **quad) for u in data.basis])
    w = A @ coef

    def out(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return sum(wk * u.sampler(X) for wk, u in zip(w, data.basis))

    return out


def projection_matrix_action(data: HarmonicFormData, l: int, coef: np.ndarray) -> np.ndarray:
    """Action of ``P^{(l)}`` on coordinates w.r.t. the orthonormal ``u_j``."""
    return data.a_matrix(l) @ np.asarray(coef, dtype=complex)


# --------------------------------------------------------------------------------------
# filtration
# --------------------------------------------------------------------------------------

def order_filtration(data: HarmonicFormData) -> dict:
    """Minimal multipole degree ``m`` per basis form and the quotient dimensions.

    Returns ``{"m": {name: m}, "dims": {m: count}}``; ``dims[0]`` is always 0.
    """
    m_of = {}
    for u in data.basis:
        degs = [mode.l for mode, c in u.multipole.decay.items() if c != 0]
        m_of[u.name] = min(degs) if degs else None
    dims = {0: 0}
    for m in m_of.values():
        if m is not None:
            dims[m] = dims.get(m, 0) + 1
    return {"m": m_of, "dims": dims}


# --------------------------------------------------------------------------------------
# disc resonance data
# --------------------------------------------------------------------------------------

@dataclass
class ResonanceData:
    """Zero-resonance objects for the disc of radius ``R`` (d = 2)."""

    R: float
    beta: float
    g0: Callable
    psi0: Callable
    varphi: Callable
    G1: Callable

    @property
    def a_psi(self) -> dict:
        """Decay coefficients of ``psi(Phi_0)``: ``1/sqrt 2`` on ``cos dx`` and ``sin dy``."""
        ms = ModeSet(2, 1, 1)
        c = 1.0 / math.sqrt(2.0)
        # (cos t dx + sin t dy)/(r sqrt(2 pi)) with cos t = sqrt(pi) Y_c etc.
        return {ms.modes[2]: c, ms.modes[5]: c}


def disc_resonance(R: float) -> ResonanceData:
    """Closed-form resonance data for the disc of radius ``R``."""
    if not (R > 0) or not math.isfinite(R):
        raise DomainError("disc radius must be positive")
    s = 1.0 / math.sqrt(2 * math.pi)
    beta = -math.log(R / 2.0)

    def g0(X):
        X = np.atleast_2d(X)
        r = np.linalg.norm(X, axis=1)
        return (s * np.log(r / R))[:, None]

    def psi0(X):
        X = np.atleast_2d(X)
        r2 = np.sum(X ** 2, axis=1)
        return s * X / r2[:, None]

    def varphi(phi_vec) -> Callable:
        """``phi(Phi) = d[(1 - R^2/r^2) Psi]`` with ``Psi(x) = Phi . x`` for a constant 1-form."""
        a = np.asarray(phi_vec, dtype=complex)

        def f(X):
            X = np.atleast_2d(X)
            r2 = np.sum(X ** 2, axis=1)
            psi = X @ a
            q = 1 - R ** 2 / r2
            grad_q = 2 * R ** 2 * X / r2[:, None] ** 2
            return q[:, None] * a[None, :] + psi[:, None] * grad_q

        return f

    def G1(coeffs) -> Callable:
        """``G_1(Phi) = -i sqrt(pi/2) (r - R^2/r) Phi(theta)`` for a degree-1 scalar Phi."""
        items = list(coeffs.items()) if isinstance(coeffs, dict) else [(coeffs, 1.0)]
        for m, _ in items:
            if (m.d, m.p, m.l) != (2, 0, 1):
                raise ConfigurationError("G1 is defined for degree-1 scalar harmonics in d=2")

        def f(X):
            X = np.atleast_2d(X)
            r = np.linalg.norm(X, axis=1)
            th = X / r[:, None]
            ang = sum(c * m.values(th)[:, 0] for m, c in items)
            return (-1j * math.sqrt(math.pi / 2) * (r - R ** 2 / r) * ang)[:, None]

        return f

    return ResonanceData(R, beta, g0, psi0, varphi, G1)
