"""Scalar and form-valued spherical harmonics, dr-wedge/interior operators,
field synthesis and multipole fitting.

Basis conventions (part of the external contract)
-------------------------------------------------
Scalar harmonics on ``S^{d-1}``:

* ``d = 2``: degree 0 is ``1/sqrt(2 pi)``; degree ``l >= 1`` is
  ``[cos(l t)/sqrt(pi), sin(l t)/sqrt(pi)]`` (in that order), ``t`` the polar angle
  of ``(x1, x2)``.
* ``d >= 3``: recursive Gegenbauer construction with the polar axis on the last
  coordinate.  For degree ``l`` the basis is enumerated by ``m = 0..l`` (outer)
  and the degree-``m`` basis of ``S^{d-2}`` in the first ``d-1`` coordinates
  (inner)::

      Y_{l,(m,k)}(x) = N * |x|^{l-m} C^{(m + (d-2)/2)}_{l-m}(x_d/|x|) * P_{m,k}(x_1..x_{d-1})

  with ``P_{m,k}`` the homogeneous extension of the ``S^{d-2}`` basis.  For
  ``d = 3`` this gives real spherical harmonics ordered
  ``[m=0, m=1 (cos), m=1 (sin), m=2 (cos), ...]`` without Condon-Shortley phase.

Form-valued harmonics ``H^p_l = H^0_l (x) Lambda^p R^d`` are carried in the global
Cartesian frame.  ``Lambda^p`` is enumerated by lexicographically increasing
index tuples (``dx^{i1} ^ ... ^ dx^{ip}``) and the mode index is
``idx = scalar_index * binom(d, p) + wedge_index``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import special as sps

from .errors import ConfigurationError, IllConditionedError, UnsupportedError
from .logcx import LogComplex, as_logcx
from .specfun import sph_radial

__all__ = [
    "Mode",
    "ModeSet",
    "MultipoleExpansion",
    "scalar_dim",
    "wedge_dim",
    "wedge_indices",
    "star_tensor",
    "hodge_star_matrix",
    "basis",
    "scalar_values",
    "mode_values",
    "modeset_values",
    "sphere_quadrature",
    "default_quadrature_order",
    "wedge_tensor",
    "interior_tensor",
    "pointwise_wedge",
    "pointwise_interior",
    "dr_wedge",
    "iota_dr",
    "dr_wedge_matrix",
    "iota_dr_matrix",
    "tau_coeffs",
    "tau_field",
    "project_samples",
    "synth",
    "synth_j",
    "synth_h1",
    "synth_h2",
    "multipole_fit",
    "multipole_synth",
    "jacobi_anger_defect",
    "plane_wave_integral",
    "stationary_phase_approx",
]

SUPPORTED_FORM_DIMS = (2, 3)
MAX_SCALAR_DIM = 7


def _check_dp(d: int, p: int):
    if d in SUPPORTED_FORM_DIMS and 0 <= p <= d:
        return
    if 4 <= d <= MAX_SCALAR_DIM and p == 0:
        return
    raise UnsupportedError(f"unsupported basis (d={d}, p={p}): forms only for d in {{2,3}}, scalars for d <= 7")


def scalar_dim(d: int, l: int) -> int:
    """``dim H^0_l(S^{d-1})``."""
    if l < 0:
        return 0
    if d == 2:
        return 1 if l == 0 else 2
    return math.comb(l + d - 1, d - 1) - (math.comb(l + d - 3, d - 1) if l >= 2 else 0)


def wedge_dim(d: int, p: int) -> int:
    return math.comb(d, p)


@lru_cache(maxsize=None)
def wedge_indices(d: int, p: int) -> tuple:
    return tuple(itertools.combinations(range(d), p))


@dataclass(frozen=True, order=True)
class Mode:
    """Element ``Phi`` of the fixed orthonormal basis of ``H^p_l(S^{d-1})``."""

    d: int
    p: int
    l: int
    idx: int

    def __post_init__(self):
        _check_dp(self.d, self.p)
        n = scalar_dim(self.d, self.l) * wedge_dim(self.d, self.p)
        if not (0 <= self.idx < n):
            raise ConfigurationError(f"mode index {self.idx} out of range for dim {n}")

    @property
    def scalar_idx(self) -> int:
        return self.idx // wedge_dim(self.d, self.p)

    @property
    def wedge_idx(self) -> int:
        return self.idx % wedge_dim(self.d, self.p)

    def values(self, points) -> np.ndarray:
        """Cartesian components at unit vectors ``points`` (shape (n, d)) -> (n, binom(d,p))."""
        return mode_values(self.d, self.p, self.l, points)[:, self.idx, :]

    def to_json(self) -> dict:
        return {"d": self.d, "p": self.p, "l": self.l, "idx": self.idx}

    @classmethod
    def from_json(cls, obj) -> "Mode":
        return cls(obj["d"], obj["p"], obj["l"], obj["idx"])


def basis(d: int, p: int, l: int) -> list:
    """Ordered list of the modes of ``H^p_l(S^{d-1})``."""
    _check_dp(d, p)
    return [Mode(d, p, l, i) for i in range(scalar_dim(d, l) * wedge_dim(d, p))]


@dataclass(frozen=True)
class ModeSet:
    """All modes of ``H^p_l`` with ``lmin <= l <= lmax`` in the canonical order."""

    d: int
    p: int
    lmax: int
    lmin: int = 0

    def __post_init__(self):
        _check_dp(self.d, self.p)

    @property
    def modes(self) -> list:
        return [m for l in range(self.lmin, self.lmax + 1) for m in basis(self.d, self.p, l)]

    def __len__(self):
        return sum(scalar_dim(self.d, l) for l in range(self.lmin, self.lmax + 1)) * wedge_dim(self.d, self.p)

    def index(self, mode: Mode) -> int:
        return self.modes.index(mode)

    def degrees(self) -> np.ndarray:
        return np.array([m.l for m in self.modes])

    def slice(self, l: int) -> slice:
        start = sum(scalar_dim(self.d, k) for k in range(self.lmin, l)) * wedge_dim(self.d, self.p)
        return slice(start, start + scalar_dim(self.d, l) * wedge_dim(self.d, self.p))

    def vector(self, coeffs: Mapping) -> np.ndarray:
        out = np.zeros(len(self), dtype=complex)
        lookup = {m: i for i, m in enumerate(self.modes)}
        for m, c in coeffs.items():
            if m not in lookup:
                raise ConfigurationError(f"mode {m} not in mode set")
            out[lookup[m]] = c
        return out

    def mapping(self, vec) -> dict:
        return {m: complex(c) for m, c in zip(self.modes, vec) if c != 0}


# --------------------------------------------------------------------------------------
# scalar harmonics
# --------------------------------------------------------------------------------------

def _gegenbauer_norm2(n: int, alpha: float) -> float:
    """``int_0^pi C_n^alpha(cos t)^2 sin^{2 alpha} t dt``."""
    lg = (
        math.log(math.pi)
        + (1 - 2 * alpha) * math.log(2)
        + math.lgamma(n + 2 * alpha)
        - math.lgamma(n + 1)
        - math.log(n + alpha)
        - 2 * math.lgamma(alpha)
    )
    return math.exp(lg)


def _homog_gegenbauer(n: int, alpha: float, t: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``rho^n C_n^alpha(t/rho)`` as a polynomial in ``(t, rho^2)``, stable near ``rho = 0``."""
    out = np.empty_like(t)
    big = rho > 1e-6 * np.maximum(np.abs(t), 1e-300)
    if np.any(big):
        out[big] = rho[big] ** n * sps.eval_gegenbauer(n, alpha, t[big] / rho[big])
    small = ~big
    if np.any(small):
        ts, r2 = t[small], rho[small] ** 2
        acc = np.zeros_like(ts)
        for j in range(n // 2 + 1):
            c = (-1) ** j * math.exp(
                math.lgamma(n - j + alpha) - math.lgamma(alpha) - math.lgamma(j + 1) - math.lgamma(n - 2 * j + 1)
            )
            acc += c * (2 * ts) ** (n - 2 * j) * r2**j
        out[small] = acc
    return out


def _homog_scalar(d: int, l: int, X: np.ndarray) -> np.ndarray:
    """Homogeneous degree-``l`` extension of the scalar basis at rows of ``X`` (n, d)."""
    if d == 2:
        w = (X[:, 0] + 1j * X[:, 1]) ** l
        if l == 0:
            return np.full((X.shape[0], 1), 1.0 / math.sqrt(2 * math.pi))
        return np.column_stack([w.real, w.imag]) / math.sqrt(math.pi)
    t = X[:, d - 1]
    rho = np.sqrt(np.sum(X * X, axis=1))
    cols = []
    for m in range(l + 1):
        n = l - m
        alpha = m + (d - 2) / 2.0
        norm = 1.0 / math.sqrt(_gegenbauer_norm2(n, alpha))
        g = _homog_gegenbauer(n, alpha, t, rho)
        sub = _homog_scalar(d - 1, m, X[:, : d - 1])
        cols.append(norm * g[:, None] * sub)
    return np.concatenate(cols, axis=1)


def scalar_values(d: int, l: int, points) -> np.ndarray:
    """Scalar basis values at unit vectors ``points`` (n, d) -> (n, scalar_dim)."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[1] != d:
        raise ConfigurationError(f"points must have {d} columns")
    return _homog_scalar(d, l, X)


def mode_values(d: int, p: int, l: int, points) -> np.ndarray:
    """Values of every mode of ``H^p_l`` at unit vectors: shape (n, nmodes, binom(d,p))."""
    _check_dp(d, p)
    S = scalar_values(d, l, points)
    nw = wedge_dim(d, p)
    n, ns = S.shape
    out = np.zeros((n, ns * nw, nw))
    for w in range(nw):
        out[:, w::nw, w] = S
    return out


def modeset_values(ms: ModeSet, points) -> np.ndarray:
    return np.concatenate([mode_values(ms.d, ms.p, l, points) for l in range(ms.lmin, ms.lmax + 1)], axis=1)


# --------------------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------------------

def default_quadrature_order(d: int, lmax: int) -> int:
    """Trapezoid count ``4 lmax + 8`` on S^1, per-axis count ``2 lmax + 4`` for d >= 3."""
    return 4 * lmax + 8 if d == 2 else 2 * lmax + 4


@lru_cache(maxsize=64)
def _sphere_quadrature_cached(d: int, n: int):
    if d == 2:
        t = 2 * np.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(t), np.sin(t)])
        w = np.full(n, 2 * np.pi / n)
        return pts, w
    a = (d - 3) / 2.0
    if a == 0:
        x, wx = np.polynomial.legendre.leggauss(n)
    else:
        x, wx = sps.roots_jacobi(n, a, a)
    sub_pts, sub_w = _sphere_quadrature_cached(d - 1, n if d > 3 else n)
    s = np.sqrt(1 - x**2)
    pts = np.concatenate([np.column_stack([s[i] * sub_pts, np.full(len(sub_w), x[i])]) for i in range(n)])
    w = np.concatenate([wx[i] * sub_w for i in range(n)])
    return pts, w


def sphere_quadrature(d: int, n: int | None = None, lmax: int | None = None):
    """Product quadrature on ``S^{d-1}``: returns (points (N, d), weights (N,)).

    ``d = 2``: ``n``-point trapezoid.  ``d >= 3``: Gauss-Jacobi in the last
    coordinate (Gauss-Legendre for d=3) times the recursive rule on ``S^{d-2}``.
    """
    if n is None:
        n = default_quadrature_order(d, 0 if lmax is None else lmax)
    pts, w = _sphere_quadrature_cached(d, int(n))
    return pts.copy(), w.copy()


def project_samples(ms: ModeSet, values: np.ndarray, points, weights) -> np.ndarray:
    """Coefficients ``<f, Phi_nu>`` of sampled forms ``values`` (N, binom(d,p)) (complex ok)."""
    B = modeset_values(ms, points)  # (N, M, C)
    return np.einsum("n,nmc,nc->m", weights, B, values)


# --------------------------------------------------------------------------------------
# algebraic operations with dr
# --------------------------------------------------------------------------------------

@lru_cache(maxsize=None)
def wedge_tensor(d: int, p: int) -> np.ndarray:
    """``W[J, I, i]`` with ``(v ^ phi)_J = sum W[J,I,i] v_i phi_I`` (p -> p+1)."""
    Ip = wedge_indices(d, p)
    Jp = wedge_indices(d, p + 1) if p + 1 <= d else ()
    W = np.zeros((len(Jp), len(Ip), d))
    pos = {I: k for k, I in enumerate(Ip)}
    for a, J in enumerate(Jp):
        for k, i in enumerate(J):
            rest = J[:k] + J[k + 1 :]
            W[a, pos[rest], i] += (-1) ** k
    return W


@lru_cache(maxsize=None)
def interior_tensor(d: int, p: int) -> np.ndarray:
    """``T[K, I, i]`` with ``(iota_v phi)_K = sum T[K,I,i] v_i phi_I`` (p -> p-1)."""
    Ip = wedge_indices(d, p)
    Kp = wedge_indices(d, p - 1) if p >= 1 else ()
    T = np.zeros((len(Kp), len(Ip), d))
    pos = {K: k for k, K in enumerate(Kp)}
    for b, I in enumerate(Ip):
        for k, i in enumerate(I):
            rest = I[:k] + I[k + 1 :]
            T[pos[rest], b, i] += (-1) ** k
    return T


def pointwise_wedge(v: np.ndarray, phi: np.ndarray, d: int, p: int) -> np.ndarray:
    """``v ^ phi`` for arrays of vectors (N, d) and p-forms (N, binom(d,p))."""
    return np.einsum("JIi,ni,nI->nJ", wedge_tensor(d, p), v, phi)


def pointwise_interior(v: np.ndarray, phi: np.ndarray, d: int, p: int) -> np.ndarray:
    return np.einsum("KIi,ni,nI->nK", interior_tensor(d, p), v, phi)


def _select_degrees(M: np.ndarray, src: ModeSet, dst: ModeSet) -> np.ndarray:
    """Enforce the selection rule ``|l_dst - l_src| = 1`` and drop quadrature noise."""
    mask = np.abs(dst.degrees()[:, None] - src.degrees()[None, :]) == 1
    M = np.where(mask, M, 0.0)
    M[np.abs(M) < 1e-14] = 0.0
    return M


@lru_cache(maxsize=64)
def dr_wedge_matrix(d: int, p: int, lmax: int) -> np.ndarray:
    """Matrix of ``dr ^`` from ``ModeSet(d,p,lmax)`` to ``ModeSet(d,p+1,lmax+1)``."""
    _check_dp(d, p + 1)
    src, dst = ModeSet(d, p, lmax), ModeSet(d, p + 1, lmax + 1)
    pts, w = sphere_quadrature(d, lmax=lmax + 1)
    Bs = modeset_values(src, pts)
    Bd = modeset_values(dst, pts)
    img = np.einsum("JIi,ni,nmI->nmJ", wedge_tensor(d, p), pts, Bs)
    M = np.einsum("n,nkJ,nmJ->km", w, Bd, img)
    return _select_degrees(M, src, dst)


@lru_cache(maxsize=64)
def iota_dr_matrix(d: int, p: int, lmax: int) -> np.ndarray:
    """Matrix of ``iota_dr`` from ``ModeSet(d,p,lmax)`` to ``ModeSet(d,p-1,lmax+1)``."""
    _check_dp(d, p - 1)
    src, dst = ModeSet(d, p, lmax), ModeSet(d, p - 1, lmax + 1)
    pts, w = sphere_quadrature(d, lmax=lmax + 1)
    Bs = modeset_values(src, pts)
    Bd = modeset_values(dst, pts)
    img = np.einsum("KIi,ni,nmI->nmK", interior_tensor(d, p), pts, Bs)
    M = np.einsum("n,nkK,nmK->km", w, Bd, img)
    return _select_degrees(M, src, dst)


@lru_cache(maxsize=None)
def star_tensor(d: int, p: int) -> np.ndarray:
    """Euclidean Hodge star on component vectors, shape (binom(d,d-p), binom(d,p))."""
    src, dst = wedge_indices(d, p), wedge_indices(d, d - p)
    T = np.zeros((len(dst), len(src)))
    for a, I in enumerate(src):
        Ic = tuple(k for k in range(d) if k not in I)
        perm = list(I) + list(Ic)
        inv = sum(1 for i in range(d) for j in range(i + 1, d) if perm[i] > perm[j])
        T[dst.index(Ic), a] = (-1) ** inv
    return T


def hodge_star_matrix(d: int, p: int, lmax: int) -> np.ndarray:
    """``*`` from ``ModeSet(d,p,lmax)`` to ``ModeSet(d,d-p,lmax)`` (degree preserving)."""
    _check_dp(d, p)
    _check_dp(d, d - p)
    n = len(ModeSet(d, 0, lmax))
    return np.kron(np.eye(n), star_tensor(d, p))


def dr_wedge(phi: Mode) -> dict:
    """``dr ^ Phi`` as a coefficient map over modes of ``H^{p+1}`` of degrees ``l +- 1``."""
    M = dr_wedge_matrix(phi.d, phi.p, phi.l)
    src = ModeSet(phi.d, phi.p, phi.l)
    col = M[:, src.index(phi)]
    dst = ModeSet(phi.d, phi.p + 1, phi.l + 1)
    return {m: float(c) for m, c in zip(dst.modes, col) if abs(c) > 1e-13}


def iota_dr(phi: Mode) -> dict:
    M = iota_dr_matrix(phi.d, phi.p, phi.l)
    src = ModeSet(phi.d, phi.p, phi.l)
    col = M[:, src.index(phi)]
    dst = ModeSet(phi.d, phi.p - 1, phi.l + 1)
    return {m: float(c) for m, c in zip(dst.modes, col) if abs(c) > 1e-13}


def tau_coeffs(ms: ModeSet) -> np.ndarray:
    """Diagonal of the antipodal pull-back on ``ms``: ``(-1)^l``."""
    return np.array([(-1.0) ** m.l for m in ms.modes])


def tau_field(f: Callable) -> Callable:
    """``tau f (theta) = f(-theta)`` componentwise in the Cartesian frame."""
    return lambda theta: f(-np.asarray(theta))


# --------------------------------------------------------------------------------------
# synthesis of j~ and h~ fields
# --------------------------------------------------------------------------------------

_RADIAL = {"j": "j", "h1": "h1", "h2": "h2"}


def _coeff_items(coeffs):
    if isinstance(coeffs, Mapping):
        return list(coeffs.items())
    ms, vec = coeffs
    return [(m, c) for m, c in zip(ms.modes, vec) if c != 0]


def synth(kind: str, lam, coeffs, x) -> np.ndarray:
    """Synthesize ``j~_lam``, ``h~^{(1)}_lam`` or ``h~^{(2)}_lam`` at Cartesian points.

    ``j~ = 2 lam^{(d-1)/2} sum a_nu Phi_nu(theta) j_{d,l}(lam r) (-i)^l``; the Hankel
    sums have prefactor ``lam^{(d-1)/2}`` (no factor 2).  ``coeffs`` is a mapping
    Mode -> complex or a pair ``(ModeSet, vector)``.  Returns (N, binom(d,p)).
    """
    lam = as_logcx(lam)
    items = _coeff_items(coeffs)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if not items:
        return np.zeros((X.shape[0], 1), dtype=complex)
    d, p = items[0][0].d, items[0][0].p
    r = np.linalg.norm(X, axis=1)
    if np.any(r <= 0):
        raise ConfigurationError("synthesis points must satisfy r > 0")
    theta = X / r[:, None]
    pref = lam.power((d - 1) / 2.0) * (2.0 if kind == "j" else 1.0)
    out = np.zeros((X.shape[0], wedge_dim(d, p)), dtype=complex)
    by_l: dict[int, list] = {}
    for m, c in items:
        by_l.setdefault(m.l, []).append((m, c))
    for l, lst in by_l.items():
        V = mode_values(d, p, l, theta)
        rad = sph_radial(_RADIAL[kind], d, l, lam, r) * (-1j) ** l
        ang = sum(c * V[:, m.idx, :] for m, c in lst)
        out += (rad[:, None] * ang)
    return pref * out


def synth_j(lam, coeffs, x):
    return synth("j", lam, coeffs, x)


def synth_h1(lam, coeffs, x):
    return synth("h1", lam, coeffs, x)


def synth_h2(lam, coeffs, x):
    return synth("h2", lam, coeffs, x)


# --------------------------------------------------------------------------------------
# multipole expansions
# --------------------------------------------------------------------------------------

@dataclass
class MultipoleExpansion:
    """``f = sum_nu (a_nu r^{-(l+d-2)} + b_nu r^l) Phi_nu`` (+ ``c_nu log r`` for d=2, l=0).

    ``decay``, ``growth`` and ``logcoeff`` are keyed by :class:`Mode`.  For d = 2,
    degree-0 modes use the pair ``{log r, 1}``: their constant is stored in
    ``growth`` and their ``log r`` coefficient in ``logcoeff``.
    """

    d: int
    p: int
    decay: dict = field(default_factory=dict)
    growth: dict = field(default_factory=dict)
    logcoeff: dict = field(default_factory=dict)
    valid_from: float = 0.0

    def scalar_logcoeff(self) -> complex:
        return complex(sum(self.logcoeff.values()))


def multipole_fit(sampler: Callable, radii: Sequence[float], lmax: int, d: int, p: int = 0,
                  tol: float = 1e-14, max_condition: float = 1e10) -> MultipoleExpansion:
    """Fit the multipole coefficients of a harmonic field outside a compact set.

    ``sampler(points)`` returns the field components (N, binom(d,p)) at Cartesian
    points.  Spherical projections at each radius are solved per mode against
    ``{r^{-(l+d-2)}, r^l}`` (``{log r, 1}`` for d=2, l=0).
    """
    radii = np.asarray(sorted(radii), dtype=float)
    if len(radii) < 2:
        raise ConfigurationError("multipole_fit needs at least 2 radii")
    ms = ModeSet(d, p, lmax)
    pts, w = sphere_quadrature(d, lmax=lmax + 2)
    proj = np.array([project_samples(ms, np.asarray(sampler(R * pts), dtype=complex), pts, w) for R in radii])
    exp = MultipoleExpansion(d, p, valid_from=float(radii[0]))
    for k, m in enumerate(ms.modes):
        if d == 2 and m.l == 0:
            if len(radii) < 3:
                raise ConfigurationError("d=2, l=0 needs at least 3 radii to resolve {1, log r}")
            A = np.column_stack([np.log(radii), np.ones_like(radii)])
        else:
            A = np.column_stack([radii ** (-(m.l + d - 2.0)), radii ** float(m.l)])
        An = A / np.linalg.norm(A, axis=0)
        s = np.linalg.svd(An, compute_uv=False)
        if s[-1] == 0 or s[0] / s[-1] > max_condition:
            raise IllConditionedError(f"multipole system for mode {m} is singular (radii too close)")
        sol, *_ = np.linalg.lstsq(A, proj[:, k], rcond=None)
        scale = max(np.max(np.abs(proj)), 1e-300)
        c1, c2 = (complex(v) if abs(v) > tol * scale else 0j for v in sol)
        if d == 2 and m.l == 0:
            if c1:
                exp.logcoeff[m] = c1
            if c2:
                exp.growth[m] = c2
        else:
            if c1:
                exp.decay[m] = c1
            if c2:
                exp.growth[m] = c2
    return exp


def multipole_synth(exp: MultipoleExpansion, x) -> np.ndarray:
    X = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.linalg.norm(X, axis=1)
    theta = X / r[:, None]
    out = np.zeros((X.shape[0], wedge_dim(exp.d, exp.p)), dtype=complex)
    for table, radial in (
        (exp.decay, lambda m: r ** (-(m.l + exp.d - 2.0))),
        (exp.growth, lambda m: r ** float(m.l)),
        (exp.logcoeff, lambda m: np.log(r)),
    ):
        for m, c in table.items():
            out += c * radial(m)[:, None] * m.values(theta)
    return out


# --------------------------------------------------------------------------------------
# plane waves
# --------------------------------------------------------------------------------------

def _coeff_lmax(g) -> int:
    items = _coeff_items(g)
    return max((m.l for m, _ in items), default=0)


def plane_wave_integral(d: int, g, lam: float, x, n: int | None = None) -> np.ndarray:
    """``int_{S^{d-1}} e^{-i lam x.omega} g(omega) d omega`` by product quadrature."""
    items = _coeff_items(g)
    x = np.asarray(x, dtype=float)
    kr = lam * np.linalg.norm(x)
    L = _coeff_lmax(g)
    if n is None:
        n = max(default_quadrature_order(d, L), int(math.ceil(1.5 * kr)) + 48)
    pts, w = sphere_quadrature(d, n)
    if not items:
        return np.zeros(1, dtype=complex)
    p = items[0][0].p
    gv = sum(c * m.values(pts) for m, c in items)
    phase = np.exp(-1j * lam * (pts @ x))
    return np.einsum("n,n,nc->c", w, phase, gv)


def jacobi_anger_defect(d: int, g, lam: float, x, n: int | None = None) -> np.ndarray:
    """``int e^{-i lam x.omega} g - (2 pi)^{(d-1)/2} lam^{(1-d)/2} j~_lam(g)(x)``."""
    items = _coeff_items(g)
    if not items:
        return np.zeros(1, dtype=complex)
    lhs = plane_wave_integral(d, g, lam, x, n)
    rhs = (2 * math.pi) ** ((d - 1) / 2.0) * lam ** ((1 - d) / 2.0) * synth_j(LogComplex(lam), g, np.atleast_2d(x))[0]
    return lhs - rhs


def stationary_phase_approx(d: int, g, lam: float, x) -> np.ndarray:
    """Two stationary points (theta and -theta) of the plane-wave integral at large ``lam r``."""
    items = _coeff_items(g)
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x)
    th = (x / r)[None, :]
    gp = sum(c * m.values(th)[0] for m, c in items)
    gm = sum(c * m.values(-th)[0] for m, c in items)
    ph = math.pi * (d - 1) / 4.0
    return (2 * math.pi / (lam * r)) ** ((d - 1) / 2.0) * (
        np.exp(-1j * lam * r + 1j * ph) * gp + np.exp(1j * lam * r - 1j * ph) * gm
    )
