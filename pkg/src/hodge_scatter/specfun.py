"""Cylinder and d-dimensional spherical Bessel/Hankel functions on the log cover.

Conventions
-----------
For ``nu = l + (d-2)/2`` the d-dimensional spherical functions are::

    j_{d,l}(z)      = sqrt(pi/2) * z**((2-d)/2) * J_nu(z)
    h^{(1,2)}_{d,l} = sqrt(pi/2) * z**((2-d)/2) * H^{(1,2)}_nu(z)

where the power ``z**((2-d)/2)`` uses the single-valued logarithm of the cover
(:class:`~hodge_scatter.logcx.LogComplex`).  For d = 3 these are the usual
spherical Bessel/Hankel functions.

Cylinder functions on the principal strip ``|arg z| <= pi`` are evaluated with
the AMOS routines shipped in :mod:`scipy.special`; the edge ``arg z = pi`` is the
upper continuation and ``arg z = -pi`` is obtained by Schwarz reflection.  Sheets with ``|arg z| > pi`` are reached exactly through the
half-turn connection formulas::

    H1_nu(z e^{i pi}) = -e^{-i nu pi} H2_nu(z)
    H2_nu(z e^{i pi}) =  e^{i nu pi} H1_nu(z) + 2 cos(nu pi) H2_nu(z)
    J_nu (z e^{i pi}) =  e^{i nu pi} J_nu(z)
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special as sps

from .errors import DomainError, RangeError
from .logcx import LogComplex, as_logcx

__all__ = [
    "NU_MAX",
    "bessel_j",
    "hankel1",
    "hankel2",
    "cyl_all",
    "sph_order",
    "sph_j",
    "sph_h1",
    "sph_h2",
    "sph_radial",
    "sph_radial_deriv",
    "rotation_defect",
    "small_x_h1",
    "large_x_h1",
]

NU_MAX = 80.0
J_MODULUS_MAX = 100.0


def _check_nu(nu: float):
    if not math.isfinite(nu) or abs(nu) > NU_MAX:
        raise RangeError(f"order nu={nu} outside supported range |nu| <= {NU_MAX}")
    if abs(2 * nu - round(2 * nu)) > 1e-12:
        raise RangeError(f"order nu={nu} must be an integer or half-integer")


def _principal_points(rho: np.ndarray, arg: float) -> np.ndarray:
    """Complex sample points for ``|arg| <= pi`` with explicit edge handling."""
    if arg == math.pi:
        return -rho + 0.0j
    return rho * np.exp(1j * arg)


def _cyl_principal(nu: float, rho: np.ndarray, arg: float):
    if arg == -math.pi:
        # lower edge of the strip: Schwarz reflection (real order) of the upper edge
        J, H1, H2 = _cyl_principal(nu, rho, math.pi)
        return np.conj(J), np.conj(H2), np.conj(H1)
    z = _principal_points(rho, arg)
    with np.errstate(all="ignore"):
        J = sps.jv(nu, z)
        H1 = sps.hankel1(nu, z)
        H2 = sps.hankel2(nu, z)
    return J, H1, H2


def cyl_all(nu: float, rho, arg: float = 0.0):
    """Return ``(J_nu, H1_nu, H2_nu)`` at ``rho * e^{i arg}`` on the cover.

    ``rho`` may be an array of positive moduli sharing one argument.
    """
    _check_nu(nu)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("cylinder functions evaluated at the origin")
    if -math.pi <= arg <= math.pi:
        return _cyl_principal(nu, rho, arg)
    c = np.exp(1j * nu * math.pi)
    cc = 2.0 * math.cos(nu * math.pi)
    if arg > math.pi:
        J, H1, H2 = cyl_all(nu, rho, arg - math.pi)
        return c * J, -np.conj(c) * H2, c * H1 + cc * H2
    J, H1, H2 = cyl_all(nu, rho, arg + math.pi)
    return np.conj(c) * J, np.conj(c) * H2 + cc * H1, -c * H1


def bessel_j(nu: float, z) -> complex:
    """``J_nu(z)``; ``J_nu(0) = 1`` if ``nu == 0`` else 0."""
    _check_nu(nu)
    z = as_logcx(z)
    if z.modulus > J_MODULUS_MAX:
        raise RangeError(f"|z| = {z.modulus} exceeds {J_MODULUS_MAX}")
    if z.is_origin:
        return 1.0 + 0j if nu == 0 else 0j
    return complex(cyl_all(nu, z.modulus, z.arg)[0])


def hankel1(nu: float, z) -> complex:
    z = as_logcx(z)
    if z.is_origin:
        raise DomainError("Hankel functions are singular at the origin")
    return complex(cyl_all(nu, z.modulus, z.arg)[1])


def hankel2(nu: float, z) -> complex:
    z = as_logcx(z)
    if z.is_origin:
        raise DomainError("Hankel functions are singular at the origin")
    return complex(cyl_all(nu, z.modulus, z.arg)[2])


# --------------------------------------------------------------------------------------
# d-dimensional spherical functions
# --------------------------------------------------------------------------------------

def sph_order(d: int, l: int) -> float:
    return l + (d - 2) / 2.0


def _check_dl(d: int, l: int):
    if not (2 <= d <= 7):
        raise RangeError(f"dimension d={d} outside 2..7")
    if not (0 <= l <= 60):
        raise RangeError(f"degree l={l} outside 0..60")


_KIND_INDEX = {"j": 0, "h1": 1, "h2": 2}


def sph_radial(kind: str, d: int, l: int, lam, r) -> np.ndarray:
    """Vectorized ``f_{d,l}(lam * r)`` for ``kind`` in {'j','h1','h2'}.

    ``lam`` is a :class:`LogComplex` (or number), ``r`` an array of positive radii.
    """
    _check_dl(d, l)
    lam = as_logcx(lam)
    r = np.asarray(r, dtype=float)
    rho = lam.modulus * r
    s = (2 - d) / 2.0
    vals = cyl_all(sph_order(d, l), rho, lam.arg)[_KIND_INDEX[kind]]
    pref = math.sqrt(math.pi / 2) * np.exp(s * (np.log(rho) + 1j * lam.arg))
    return pref * vals


def sph_radial_deriv(kind: str, d: int, l: int, lam, r) -> np.ndarray:
    """Derivative of ``x -> f_{d,l}(x)`` evaluated at ``x = lam*r``.

    Uses ``(x^{-s} C_nu)' = x^{-s} ((l/x) C_nu - C_{nu+1})`` with ``s=(d-2)/2``.
    Multiply by ``lam`` to get ``d/dr f(lam r)``.
    """
    _check_dl(d, l)
    lam = as_logcx(lam)
    r = np.asarray(r, dtype=float)
    rho = lam.modulus * r
    s = (d - 2) / 2.0
    nu = sph_order(d, l)
    k = _KIND_INDEX[kind]
    c0 = cyl_all(nu, rho, lam.arg)[k]
    c1 = cyl_all(nu + 1, rho, lam.arg)[k]
    logx = np.log(rho) + 1j * lam.arg
    x = np.exp(logx)
    return math.sqrt(math.pi / 2) * np.exp(-s * logx) * ((l / x) * c0 - c1)


def _scalar(kind, d, l, z):
    z = as_logcx(z)
    if z.is_origin:
        if kind == "j":
            _check_dl(d, l)
            # j_{d,l}(x) ~ sqrt(pi/2) (x/2)^nu x^{(2-d)/2} / Gamma(nu+1): finite only for l = 0
            if l == 0:
                return math.sqrt(math.pi / 2) * 2.0 ** (-(d - 2) / 2.0) / math.gamma(d / 2.0) + 0j
            return 0j
        raise DomainError("spherical Hankel functions are singular at the origin")
    return complex(sph_radial(kind, d, l, LogComplex(z.modulus, z.arg), 1.0))


def sph_j(d: int, l: int, z) -> complex:
    return _scalar("j", d, l, z)


def sph_h1(d: int, l: int, z) -> complex:
    return _scalar("h1", d, l, z)


def sph_h2(d: int, l: int, z) -> complex:
    return _scalar("h2", d, l, z)


def rotation_defect(kind: int, d: int, l: int, x: float) -> complex:
    """Residual of the half-turn identities for the spherical Hankel functions.

    kind 1: ``h1(x e^{i pi}) + (-1)^{l+d} h2(x)``
    kind 2: ``h2(x e^{i pi}) - (-1)^l (h1(x) + (1 + (-1)^d) h2(x))``

    Both sides are evaluated independently (the rotated point is evaluated
    directly on the edge of the principal strip).
    """
    if x <= 0:
        raise DomainError("rotation_defect requires x > 0")
    z = LogComplex(x, 0.0)
    zr = z.rotate_pi()
    if kind == 1:
        return sph_h1(d, l, zr) + (-1) ** (l + d) * sph_h2(d, l, z)
    if kind == 2:
        return sph_h2(d, l, zr) - (-1) ** l * (sph_h1(d, l, z) + (1 + (-1) ** d) * sph_h2(d, l, z))
    raise ValueError("kind must be 1 or 2")


def small_x_h1(d: int, l: int, x: float) -> complex:
    """Leading small-argument behaviour of ``h^{(1)}_{d,l}(x)`` for real ``x > 0``."""
    nu = sph_order(d, l)
    if nu == 0:
        return -1j * math.sqrt(2 / math.pi) * (-math.log(x))
    return -1j * math.pi ** -0.5 * 2.0 ** (l + (d - 3) / 2.0) * math.gamma(nu) * x ** (-l - d + 2)


def large_x_h1(d: int, l: int, x: float) -> complex:
    """Leading large-argument behaviour of ``h^{(1)}_{d,l}(x)`` for real ``x > 0``."""
    return x ** (-(d - 1) / 2.0) * np.exp(1j * (x - math.pi * l / 2 - math.pi * (d - 1) / 4))
