"""Nystrom boundary-integral solver for exterior 2D Dirichlet Helmholtz scattering.

Scattered field ansatz (combined double/single layer, outward normal ``nu``)::

    u^s(x) = int_Gamma [ d_nu(y) Phi(x, y) - i eta Phi(x, y) ] phi(y) ds(y),
    Phi(x, y) = (i/4) H^{(1)}_0(lam |x - y|).

The Dirichlet condition ``u^s = -u^i`` on ``Gamma`` becomes, with
``psi(tau) = phi(x(tau))`` on a counter-clockwise ``2 pi``-periodic
parametrization and ``n(tau) = (x2'(tau), -x1'(tau))``::

    psi(t) + int_0^{2pi} [L(t,tau) - i eta M(t,tau)] psi(tau) dtau = -2 u^i(x(t)),
    L = (i lam/2) n(tau).(x(t)-x(tau)) H^{(1)}_1(lam r)/r,   M = (i/2) H^{(1)}_0(lam r) |x'(tau)|.

Both kernels are split as ``K1(t,tau) log(4 sin^2((t-tau)/2)) + K2(t,tau)`` and
integrated with the trigonometric product rule for the logarithmic part and the
trapezoidal rule for the smooth part (spectral accuracy on analytic curves).

Far field: ``u^s(x) ~ e^{i lam r} r^{-1/2} u_inf(x/r)`` with
``u_inf(xh) = e^{-i pi/4}/sqrt(8 pi lam) int (lam n.xh + eta |x'|) e^{-i lam xh.x(tau)} psi dtau``.
For the incident field ``j~_lam(Phi_nu)`` the amplitude is
``(A_lam Phi_nu)(theta) = e^{i pi/4} u_inf(-theta)``.

The logarithmic capacity solves the augmented first-kind system
``int log|x(t)-x(tau)| w(tau) dtau = log cap``, ``int w dtau = 1``; then
``beta = log 2 - log cap``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sps

from . import harmonics as hm
from .ball_scatter import ScatteringBlock
from .errors import ConfigurationError, DomainError, IllConditionedError
from .harmonics import Mode, ModeSet
from .logcx import LogComplex

__all__ = [
    "BoundaryCurve2D",
    "circle",
    "ellipse",
    "kite",
    "samples_curve",
    "curve_from_json",
    "log_weights",
    "BemSolution",
    "solve_dirichlet",
    "far_field",
    "far_field_to_amplitude",
    "bem_block",
    "boundary_residual",
    "scattered_field",
    "laplace_capacity",
]


@dataclass
class BoundaryCurve2D:
    """Counter-clockwise ``2 pi``-periodic curve with first and second derivatives."""

    name: str
    x: Callable[[np.ndarray], np.ndarray]
    dx: Callable[[np.ndarray], np.ndarray]
    ddx: Callable[[np.ndarray], np.ndarray]
    params: dict

    def nodes(self, N: int):
        t = 2 * np.pi * np.arange(N) / N
        X, D, DD = self.x(t), self.dx(t), self.ddx(t)
        speed = np.hypot(D[:, 0], D[:, 1])
        if np.min(speed) <= 1e-12 * max(np.max(speed), 1e-300):
            raise DomainError(f"curve {self.name}: |x'(t)| vanishes on the quadrature grid")
        return t, X, D, DD

    def scaled(self, s: float) -> "BoundaryCurve2D":
        return BoundaryCurve2D(f"{self.name}*{s:g}", lambda t: s * self.x(t), lambda t: s * self.dx(t),
                               lambda t: s * self.ddx(t), {**self.params, "scale": s * self.params.get("scale", 1.0)})

    def to_json(self) -> dict:
        return {"shape": self.name, **self.params}


def _stack(a, b):
    return np.stack([a, b], axis=-1)


def circle(R: float = 1.0) -> BoundaryCurve2D:
    if R <= 0:
        raise DomainError("radius must be positive")
    return BoundaryCurve2D("circle", lambda t: _stack(R * np.cos(t), R * np.sin(t)),
                           lambda t: _stack(-R * np.sin(t), R * np.cos(t)),
                           lambda t: _stack(-R * np.cos(t), -R * np.sin(t)), {"R": R})


def ellipse(a: float = 2.0, b: float = 1.0) -> BoundaryCurve2D:
    if a <= 0 or b <= 0:
        raise DomainError("semi-axes must be positive")
    return BoundaryCurve2D("ellipse", lambda t: _stack(a * np.cos(t), b * np.sin(t)),
                           lambda t: _stack(-a * np.sin(t), b * np.cos(t)),
                           lambda t: _stack(-a * np.cos(t), -b * np.sin(t)), {"a": a, "b": b})


def kite() -> BoundaryCurve2D:
    """``(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)``."""
    return BoundaryCurve2D("kite", lambda t: _stack(np.cos(t) + 0.65 * np.cos(2 * t) - 0.65, 1.5 * np.sin(t)),
                           lambda t: _stack(-np.sin(t) - 1.3 * np.sin(2 * t), 1.5 * np.cos(t)),
                           lambda t: _stack(-np.cos(t) - 2.6 * np.cos(2 * t), -1.5 * np.sin(t)), {})


def samples_curve(t, x, y) -> BoundaryCurve2D:
    """Curve from equispaced samples, extended by trigonometric interpolation."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    M = len(t)
    if len(x) != M or len(y) != M or M < 8:
        raise ConfigurationError("samples curve needs matching t, x, y arrays of length >= 8")
    if not np.allclose(t, 2 * np.pi * np.arange(M) / M + t[0], atol=1e-12):
        raise ConfigurationError("samples curve needs equispaced t over one period")
    z = x + 1j * y
    c = np.fft.fft(z) / M
    k = np.fft.fftfreq(M, 1.0 / M)
    if M % 2 == 0:
        c[M // 2] *= 0.5
        c = np.append(c, c[M // 2])
        k = np.append(k, M // 2)
        k[M // 2] = -M // 2
    t0 = t[0]

    def ev(tt, order):
        tt = np.asarray(tt, dtype=float) - t0
        E = np.exp(1j * np.outer(tt, k)) * (1j * k) ** order
        v = E @ c
        return _stack(v.real, v.imag)

    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    if area <= 0:
        raise ConfigurationError("samples curve must be counter-clockwise")
    return BoundaryCurve2D("samples", lambda s: ev(s, 0), lambda s: ev(s, 1), lambda s: ev(s, 2),
                           {"t": t.tolist(), "x": x.tolist(), "y": y.tolist()})


def curve_from_json(obj: dict) -> BoundaryCurve2D:
    shape = obj.get("shape")
    if shape == "circle":
        return circle(float(obj.get("R", obj.get("radius", 1.0))))
    if shape == "ellipse":
        return ellipse(float(obj.get("a", 2.0)), float(obj.get("b", 1.0)))
    if shape == "kite":
        return kite()
    if shape == "samples":
        return samples_curve(obj["t"], obj["x"], obj["y"])
    raise ConfigurationError(f"unknown curve shape {shape!r}")


def log_weights(N: int) -> np.ndarray:
    """``R_j`` with ``int log(4 sin^2((t_i - tau)/2)) f(tau) dtau ~ sum_j R_{|i-j|} f(t_j)``."""
    if N % 2:
        raise ConfigurationError("N must be even")
    n = N // 2
    tj = np.pi * np.arange(N) / n
    m = np.arange(1, n)
    R = -(2 * np.pi / n) * (np.cos(np.outer(tj, m)) / m).sum(axis=1) - (np.pi / n ** 2) * np.cos(n * tj)
    return R


def _circulant(R: np.ndarray) -> np.ndarray:
    N = len(R)
    idx = (np.arange(N)[None, :] - np.arange(N)[:, None]) % N
    return R[idx]


def _kernel_parts(t, X, D, DD, lam: float, eta: float):
    N = len(t)
    diff = X[:, None, :] - X[None, :, :]  # x(t_i) - x(tau_j)
    r = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(r, 1.0)
    nvec = np.stack([D[:, 1], -D[:, 0]], axis=-1)  # n(tau_j), |n| = |x'|
    ndot = np.einsum("jc,ijc->ij", nvec, diff)
    speed = np.hypot(D[:, 0], D[:, 1])
    kr = lam * r
    H0 = sps.hankel1(0, kr)
    H1 = sps.hankel1(1, kr)
    J0 = sps.j0(kr)
    J1 = sps.j1(kr)
    logs = np.log(4 * np.sin((t[:, None] - t[None, :]) / 2) ** 2 + np.eye(N))
    L = 0.5j * lam * ndot * H1 / r
    L1 = -(lam / (2 * np.pi)) * ndot * J1 / r
    L2 = L - L1 * logs
    curv = nvec[:, 0] * DD[:, 0] + nvec[:, 1] * DD[:, 1]
    np.fill_diagonal(L1, 0.0)
    np.fill_diagonal(L2, curv / (2 * np.pi * speed ** 2))
    M = 0.5j * H0 * speed[None, :]
    M1 = -(1 / (2 * np.pi)) * J0 * speed[None, :]
    M2 = M - M1 * logs
    np.fill_diagonal(M1, -speed / (2 * np.pi))
    np.fill_diagonal(M2, (0.5j - np.euler_gamma / np.pi - np.log(lam * speed / 2) / np.pi) * speed)
    K1 = L1 - 1j * eta * M1
    K2 = L2 - 1j * eta * M2
    return K1, K2


@dataclass
class BemSolution:
    curve: BoundaryCurve2D
    lam: float
    eta: float
    N: int
    t: np.ndarray
    X: np.ndarray
    D: np.ndarray
    psi: np.ndarray  # (N, k) densities, one column per incident field
    rhs: np.ndarray
    condition: float
    residual: float
    incident: object = None


def _incident_values(incident, lam: float, X: np.ndarray) -> np.ndarray:
    """Columns of incident boundary values for a coefficient map, a list of maps, a plane wave or an array."""
    if isinstance(incident, tuple) and len(incident) == 2 and np.ndim(incident[0]) == 1:
        omega, amp = incident
        omega = np.asarray(omega, dtype=float)
        return (amp * np.exp(1j * lam * X @ omega))[:, None]
    if isinstance(incident, dict):
        incident = [incident]
    if isinstance(incident, (list, tuple)):
        cols = [hm.synth_j(LogComplex(lam), g, X)[:, 0] if g else np.zeros(len(X), dtype=complex) for g in incident]
        return np.stack(cols, axis=1)
    arr = np.asarray(incident, dtype=complex)
    return arr[:, None] if arr.ndim == 1 else arr


def solve_dirichlet(curve: BoundaryCurve2D, lam: float, incident, N: int = 256, eta: float | None = None,
                    max_condition: float = 1e12) -> BemSolution:
    """Solve the combined-field equation for one or several incident fields.

    ``incident``: coefficient map ``{Mode: c}`` (field ``j~_lam``), a list of such
    maps, a plane wave ``(omega, amplitude)``, or boundary values (N,) / (N, k).
    Default coupling ``eta = max(lam, 1)``.
    """
    lam = float(lam)
    if not lam > 0:
        raise DomainError("bem2d needs real lambda > 0")
    if N % 2 or N < 64:
        raise ConfigurationError("N must be even and >= 64")
    eta = max(lam, 1.0) if eta is None else float(eta)
    t, X, D, DD = curve.nodes(N)
    K1, K2 = _kernel_parts(t, X, D, DD, lam, eta)
    Rw = _circulant(log_weights(N))
    A = np.eye(N) + Rw * K1 + (np.pi / (N // 2)) * K2
    ui = _incident_values(incident, lam, X)
    rhs = -2.0 * ui
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > max_condition:
        raise IllConditionedError(f"bem2d: system condition {cond:.3g} at lambda={lam}")
    psi = np.linalg.solve(A, rhs)
    res = float(np.linalg.norm(A @ psi - rhs) / max(np.linalg.norm(rhs), 1e-300)) if np.any(rhs) else 0.0
    return BemSolution(curve, lam, eta, N, t, X, D, psi, rhs, cond, res, incident)


def far_field(sol: BemSolution, theta: np.ndarray) -> np.ndarray:
    """``u_inf`` at observation angles ``theta`` (M,), one column per density."""
    theta = np.asarray(theta, dtype=float)
    xh = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    nvec = np.stack([sol.D[:, 1], -sol.D[:, 0]], axis=-1)
    speed = np.hypot(sol.D[:, 0], sol.D[:, 1])
    ker = (sol.lam * xh @ nvec.T + sol.eta * speed[None, :]) * np.exp(-1j * sol.lam * xh @ sol.X.T)
    w = 2 * np.pi / sol.N
    return np.exp(-0.25j * np.pi) / math.sqrt(8 * np.pi * sol.lam) * w * (ker @ sol.psi)


def far_field_to_amplitude(sol: BemSolution, lmax: int, in_modes: list | None = None) -> ScatteringBlock:
    """Project ``e^{i pi/4} u_inf(-theta)`` on scalar modes: ``entries[mu][nu]``.

    The columns of ``sol.psi`` must correspond to incident fields ``j~(Phi_nu)``
    for ``in_modes`` (default: all of ``ModeSet(2, 0, lmax)``).
    """
    ms = ModeSet(2, 0, lmax)
    in_modes = ms.modes if in_modes is None else in_modes
    if sol.psi.shape[1] != len(in_modes):
        raise ConfigurationError("density columns do not match the incident modes")
    if 2 * lmax + 2 > sol.N // 2:
        raise ConfigurationError(f"lmax={lmax} too large for N={sol.N} (aliasing)")
    M = max(4 * lmax + 16, 64)
    th = 2 * np.pi * np.arange(M) / M
    Ainf = np.exp(0.25j * np.pi) * far_field(sol, th + np.pi)  # (M, k)
    pts = np.stack([np.cos(th), np.sin(th)], axis=-1)
    B = hm.modeset_values(ms, pts)[:, :, 0]  # (M, modes)
    ent = (2 * np.pi / M) * B.T @ Ainf
    return ScatteringBlock(LogComplex(sol.lam), ms.modes, ent,
                           {"construction": "bem2d", "curve": sol.curve.to_json(), "N": sol.N, "eta": sol.eta,
                            "in_modes": [m.to_json() for m in in_modes]})


def bem_block(curve: BoundaryCurve2D, lam: float, lmax: int, N: int = 256, eta: float | None = None) -> ScatteringBlock:
    """Scalar Dirichlet amplitude block ``entries[mu][nu]`` for a general curve."""
    ms = ModeSet(2, 0, lmax)
    sol = solve_dirichlet(curve, lam, [{m: 1.0} for m in ms.modes], N=N, eta=eta)
    return far_field_to_amplitude(sol, lmax)


def boundary_residual(sol: BemSolution, n_test: int = 37, column: int = 0) -> float:
    """Dirichlet condition at off-grid boundary points.

    Compares the trigonometric interpolant of the density with the Nystrom
    interpolant (the integral equation evaluated at the off-grid point), relative
    to ``max |psi|``.
    """
    N = sol.N
    n = N // 2
    ts = (np.arange(n_test) + 0.37) * 2 * np.pi / n_test
    psi = sol.psi[:, column]
    c = np.fft.fft(psi) / N
    k = np.fft.fftfreq(N, 1.0 / N)
    c[n] *= 0.5
    c2 = np.append(c, c[n])
    k2 = np.append(k, n)
    k2[n] = -n
    trig = np.exp(1j * np.outer(ts, k2)) @ c2
    Xs, Ds = sol.curve.x(ts), sol.curve.dx(ts)
    # kernels between off-grid t and grid tau
    diff = Xs[:, None, :] - sol.X[None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    nvec = np.stack([sol.D[:, 1], -sol.D[:, 0]], axis=-1)
    ndot = np.einsum("jc,ijc->ij", nvec, diff)
    speed = np.hypot(sol.D[:, 0], sol.D[:, 1])
    kr = sol.lam * r
    logs = np.log(4 * np.sin((ts[:, None] - sol.t[None, :]) / 2) ** 2)
    L = 0.5j * sol.lam * ndot * sps.hankel1(1, kr) / r
    L1 = -(sol.lam / (2 * np.pi)) * ndot * sps.j1(kr) / r
    M = 0.5j * sps.hankel1(0, kr) * speed[None, :]
    M1 = -(1 / (2 * np.pi)) * sps.j0(kr) * speed[None, :]
    K1 = L1 - 1j * sol.eta * M1
    K2 = (L - 1j * sol.eta * M) - K1 * logs
    m = np.arange(1, n)
    tt = ts[:, None] - sol.t[None, :]
    Rw = -(2 * np.pi / n) * np.einsum("ijm,m->ij", np.cos(tt[..., None] * m), 1.0 / m) - (np.pi / n ** 2) * np.cos(n * tt)
    ui = _incident_column(sol, Xs, column)
    nys = -2.0 * ui - (Rw * K1 + (np.pi / n) * K2) @ psi
    return float(np.max(np.abs(nys - trig)) / max(np.max(np.abs(psi)), 1e-300))


def _incident_column(sol: BemSolution, Xs: np.ndarray, column: int) -> np.ndarray:
    return _incident_values(sol.incident, sol.lam, Xs)[:, column]


def scattered_field(sol: BemSolution, x, column: int = 0) -> np.ndarray:
    """``u^s`` at exterior points (trapezoidal rule; accurate away from the boundary)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    diff = x[:, None, :] - sol.X[None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    nvec = np.stack([sol.D[:, 1], -sol.D[:, 0]], axis=-1)
    ndot = np.einsum("jc,ijc->ij", nvec, diff)
    speed = np.hypot(sol.D[:, 0], sol.D[:, 1])
    kr = sol.lam * r
    dl = 0.25j * sol.lam * sps.hankel1(1, kr) * ndot / r
    sl = 0.25j * sps.hankel1(0, kr) * speed[None, :]
    return (2 * np.pi / sol.N) * (dl - 1j * sol.eta * sl) @ sol.psi[:, column]


# --------------------------------------------------------------------------------------
# logarithmic capacity
# --------------------------------------------------------------------------------------

def _capacity_system(curve: BoundaryCurve2D, N: int):
    t, X, D, _ = curve.nodes(N)
    n = N // 2
    diff = X[:, None, :] - X[None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    s4 = 4 * np.sin((t[:, None] - t[None, :]) / 2) ** 2
    speed = np.hypot(D[:, 0], D[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        smooth = np.log(r) - 0.5 * np.log(s4)
    np.fill_diagonal(smooth, np.log(speed))
    Rw = _circulant(log_weights(N))
    A = 0.5 * Rw + (np.pi / n) * smooth
    S = np.zeros((N + 1, N + 1))
    S[:N, :N] = A
    S[:N, N] = -1.0
    S[N, :N] = np.pi / n
    rhs = np.zeros(N + 1)
    rhs[N] = 1.0
    return S, rhs


def laplace_capacity(curve: BoundaryCurve2D, N: int = 256, max_condition: float = 1e10,
                     _retry: bool = True) -> tuple[float, float]:
    """Logarithmic capacity and ``beta = log 2 - log cap``.

    Solves ``int log|x(t) - x(tau)| w(tau) dtau = log cap`` with ``int w = 1``.
    If the system is numerically degenerate the curve is rescaled by 2 and the
    result mapped back with ``cap(s C) = s cap(C)``.
    """
    if N % 2 or N < 64:
        raise ConfigurationError("N must be even and >= 64")
    S, rhs = _capacity_system(curve, N)
    cond = float(np.linalg.cond(S))
    if not np.isfinite(cond) or cond > max_condition:
        if _retry:
            cap2, _ = laplace_capacity(curve.scaled(2.0), N, max_condition, _retry=False)
            cap = cap2 / 2.0
            return cap, math.log(2.0) - math.log(cap)
        raise IllConditionedError(f"capacity system condition {cond:.3g}")
    sol = np.linalg.solve(S, rhs)
    cap = math.exp(sol[N])
    return cap, math.log(2.0) - math.log(cap)
