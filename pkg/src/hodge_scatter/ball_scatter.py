"""Exact scattering matrices, generalized eigenfunctions and phase shifts for
ball (d >= 3) and disc (d = 2) obstacles of radius ``R``.

Exterior solutions are written ``E = j~_lam(Phi) + h~^{(1)}_lam(A_lam Phi)`` and the
amplitude ``A_lam`` is fixed by the boundary condition at ``r = R``.  Block
entries follow ``entries[mu][nu] = <A_lam Phi_nu, Phi_mu>``.

Three constructions are provided:

* scalar channels (Dirichlet/Neumann) in any ``2 <= d <= 7``;
* relative 1-forms: the disc via the rotating complex frame
  ``e_+- = (dx +- i dy)/sqrt 2`` (one 2x2 system per total angular index), the
  ball via radial/TE/TM channel projectors;
* a generic mode-matching solver imposing ``dr ^ E = 0`` and ``delta E = 0`` at
  ``r = R`` directly in mode space, using ``delta h~(Psi) = i lam h~(iota_dr Psi)``.
  It serves as an independent oracle for the channel constructions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import harmonics as hm
from .errors import ConfigurationError, RefineGridError, ResonancePoleError, UnsupportedError
from .harmonics import Mode, ModeSet
from .logcx import LogComplex, as_logcx
from .specfun import cyl_all, sph_radial, sph_radial_deriv

__all__ = [
    "Ball",
    "ScatteringBlock",
    "Channel",
    "scalar_amplitude",
    "scalar_block",
    "disc_p1_block",
    "disc_p1_sector",
    "disc_p1_potential_block",
    "ball3d_p1_block",
    "ball3d_p2_block",
    "te_amplitude",
    "tm_amplitude",
    "mode_matching_block",
    "scattering_block",
    "channels",
    "eigenfunction_eval",
    "boundary_residual",
    "phase_shift",
]

DEN_MIN = 1e-300


@dataclass(frozen=True)
class Ball:
    """Ball/disc obstacle of radius ``R`` in ``R^d`` with p-form boundary conditions.

    ``p = 0`` uses ``bc`` ('dirichlet' = relative, or 'neumann' = absolute);
    ``p >= 1`` always uses relative boundary conditions.
    """

    d: int
    p: int = 0
    R: float = 1.0
    bc: str = "dirichlet"

    def __post_init__(self):
        if self.R <= 0:
            raise ConfigurationError("radius must be positive")
        if self.bc not in ("dirichlet", "neumann"):
            raise ConfigurationError(f"unknown boundary condition {self.bc!r}")
        if self.p > 0 and self.bc != "dirichlet":
            raise ConfigurationError("form degrees p >= 1 use relative boundary conditions")
        hm._check_dp(self.d, self.p)

    @property
    def scalar_bc(self) -> str | None:
        """Scalar boundary condition when the problem reduces to one (p=0 or p=d)."""
        if self.p == 0:
            return self.bc
        if self.p == self.d:
            return "neumann"
        return None

    def to_json(self) -> dict:
        return {"shape": "ball", "d": self.d, "p": self.p, "radius": self.R, "bc": self.bc}


# --------------------------------------------------------------------------------------
# ScatteringBlock
# --------------------------------------------------------------------------------------

@dataclass
class ScatteringBlock:
    """Matrix ``entries[mu][nu] = <A_lam Phi_nu, Phi_mu>`` on a finite mode set."""

    lam: LogComplex
    modes: list
    entries: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def S(self) -> np.ndarray:
        return np.eye(len(self.modes)) + self.entries

    def unitarity_defect(self, inner: int | None = None) -> float:
        """``max |(S^* S - I)|`` over columns of degree ``<= inner``.

        For forms the amplitude couples degrees ``l`` and ``l +- 2``, so the
        default keeps the columns whose images lie inside the block.
        """
        deg = self.degrees()
        if inner is None:
            p = self.modes[0].p
            d = self.modes[0].d
            inner = deg.max() - (2 if 0 < p < d else 0)
        cols = deg <= inner
        if not np.any(cols):
            raise ConfigurationError("block too small to contain a complete column; raise lmax")
        S = self.S[:, cols]
        G = S.conj().T @ S - np.eye(int(cols.sum()))
        return float(np.max(np.abs(G)))

    def degrees(self) -> np.ndarray:
        return np.array([m.l for m in self.modes])

    def sub(self, l_row: int, l_col: int | None = None) -> np.ndarray:
        l_col = l_row if l_col is None else l_col
        deg = self.degrees()
        return self.entries[np.ix_(deg == l_row, deg == l_col)]

    def trace(self, l: int) -> complex:
        return complex(np.trace(self.sub(l)))

    def restrict(self, lmax: int) -> "ScatteringBlock":
        keep = self.degrees() <= lmax
        return ScatteringBlock(self.lam, [m for m, k in zip(self.modes, keep) if k],
                               self.entries[np.ix_(keep, keep)], dict(self.meta))

    def entry(self, mu: Mode, nu: Mode) -> complex:
        return complex(self.entries[self.modes.index(mu), self.modes.index(nu)])

    def apply(self, coeffs: Mapping) -> dict:
        """``A_lam Phi`` for a coefficient map ``Phi``."""
        v = np.zeros(len(self.modes), dtype=complex)
        idx = {m: i for i, m in enumerate(self.modes)}
        for m, c in coeffs.items():
            if m not in idx:
                raise ConfigurationError(f"mode {m} outside the block")
            v[idx[m]] = c
        w = self.entries @ v
        return {m: complex(c) for m, c in zip(self.modes, w) if c != 0}

    def to_json(self) -> dict:
        return {
            "lambda": self.lam.to_json(),
            "modes": [m.to_json() for m in self.modes],
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.entries],
            **({"meta": self.meta} if self.meta else {}),
        }

    @classmethod
    def from_json(cls, obj) -> "ScatteringBlock":
        ent = np.array([[complex(a, b) for a, b in row] for row in obj["entries"]], dtype=complex)
        return cls(LogComplex.from_json(obj["lambda"]), [Mode.from_json(m) for m in obj["modes"]], ent,
                   obj.get("meta", {}))


# --------------------------------------------------------------------------------------
# scalar channels
# --------------------------------------------------------------------------------------

def _ratio(num: complex, den: complex, lam, what: str) -> complex:
    if not np.isfinite(den):
        # the outgoing function overflowed: the ratio underflows
        return 0j
    if abs(den) < DEN_MIN or not np.isfinite(num):
        raise ResonancePoleError(f"{what}: outgoing denominator vanishes at lambda={lam}", lam)
    return complex(-2.0 * num / den)


def scalar_amplitude(d: int, bc: str, l: int, R: float, lam) -> complex:
    """Scalar amplitude ``a_l(lam)`` for the ball/disc of radius ``R``.

    Dirichlet: ``-2 j_{d,l}(lam R) / h^{(1)}_{d,l}(lam R)``;
    Neumann: ``-2 j'_{d,l}(lam R) / h^{(1)'}_{d,l}(lam R)``.
    """
    lam = as_logcx(lam)
    if bc == "dirichlet":
        num = complex(sph_radial("j", d, l, lam, R))
        den = complex(sph_radial("h1", d, l, lam, R))
    elif bc == "neumann":
        num = complex(sph_radial_deriv("j", d, l, lam, R))
        den = complex(sph_radial_deriv("h1", d, l, lam, R))
    else:
        raise ConfigurationError(f"unknown scalar boundary condition {bc!r}")
    return _ratio(num, den, lam, f"scalar {bc} d={d} l={l}")


def te_amplitude(l: int, R: float, lam) -> complex:
    """TE channel (d=3): tangential fields ``z_l(lam r) x grad Y``; condition ``z_l(lam R)=0``."""
    return scalar_amplitude(3, "dirichlet", l, R, lam)


def tm_amplitude(l: int, R: float, lam) -> complex:
    """TM channel (d=3): condition ``(x z_l(x))' = 0`` at ``x = lam R``."""
    lam = as_logcx(lam)
    x = lam.project() * R
    num = complex(sph_radial("j", 3, l, lam, R) + x * sph_radial_deriv("j", 3, l, lam, R))
    den = complex(sph_radial("h1", 3, l, lam, R) + x * sph_radial_deriv("h1", 3, l, lam, R))
    return _ratio(num, den, lam, f"TM l={l}")


def scalar_block(d: int, bc: str, R: float, lam, lmax: int, p: int | None = None) -> ScatteringBlock:
    """Diagonal block for scalar problems (p=0, or p=d via the volume form)."""
    lam = as_logcx(lam)
    p = 0 if p is None else p
    ms = ModeSet(d, p, lmax)
    amps = {l: scalar_amplitude(d, bc, l, R, lam) for l in range(lmax + 1)}
    ent = np.diag([amps[m.l] for m in ms.modes]).astype(complex)
    return ScatteringBlock(lam, ms.modes, ent, {"construction": f"scalar-{bc}"})


# --------------------------------------------------------------------------------------
# disc, relative 1-forms: rotating complex frame
# --------------------------------------------------------------------------------------

def _sigma(k: int) -> complex:
    """``(-i)^{|k|} * s_k`` where ``Z_{|k|} = s_k Z_k`` for integer cylinder functions."""
    s = (-1) ** k if k < 0 else 1
    return (-1j) ** abs(k) * s


def disc_p1_sector(n: int, R: float, lam) -> np.ndarray:
    """2x2 amplitude on complex modes ``(e_{n-1} eps_+, e_{n+1} eps_-)`` of total index ``n``.

    ``e_m = e^{i m t}/sqrt(2 pi)``, ``eps_+- = (dx +- i dy)/sqrt 2``.  Imposes
    ``omega_t(R) = 0`` and ``(div omega)(R) = 0``.
    """
    lam = as_logcx(lam)
    x = lam.scale(R)
    rho, arg = x.modulus, x.arg

    def JH(k):
        J, H1, _ = cyl_all(float(abs(k)), rho, arg)
        s = (-1) ** k if k < 0 else 1
        return complex(J) * s, complex(H1) * s  # signed-order values Z_k

    Jm, Hm = JH(n - 1)
    Jp, Hp = JH(n + 1)
    Jn, Hn = JH(n)
    sm, sp = _sigma(n - 1), _sigma(n + 1)
    M = np.array([[sm * Hm, -sp * Hp], [-sm * Hn, sp * Hn]], dtype=complex)
    N = -2.0 * np.array([[sm * Jm, -sp * Jp], [-sm * Jn, sp * Jn]], dtype=complex)
    if not np.all(np.isfinite(M)):
        # both outgoing functions overflowed: amplitude below representable range
        return np.zeros((2, 2), dtype=complex)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    scale = np.max(np.abs(M)) ** 2
    if abs(det) < 1e-14 * scale or abs(det) < DEN_MIN:
        raise ResonancePoleError(f"disc p=1 sector n={n} singular at lambda={lam}", lam)
    return np.linalg.solve(M, N)


@lru_cache(maxsize=32)
def _disc_complex_change(lmax: int):
    """Unitary ``U[k, nu] = <Phi_nu, psi_k>`` from real modes to complex modes (m, +-)."""
    ms = ModeSet(2, 1, lmax)
    pts, w = hm.sphere_quadrature(2, lmax=lmax + 2)
    t = np.arctan2(pts[:, 1], pts[:, 0])
    B = hm.modeset_values(ms, pts)  # (N, M, 2)
    labels = []
    cols = []
    for m in range(-lmax, lmax + 1):
        e = np.exp(1j * m * t) / math.sqrt(2 * math.pi)
        for sgn in (+1, -1):
            vec = np.array([1.0, 1j * sgn]) / math.sqrt(2)
            psi = e[:, None] * vec[None, :]
            labels.append((m, sgn))
            cols.append(psi)
    Psi = np.stack(cols, axis=1)  # (N, K, 2)
    U = np.einsum("n,nkc,nvc->kv", w, Psi.conj(), B)
    U[np.abs(U) < 1e-13] = 0.0  # exact zeros; quadrature leaves roundoff there
    return labels, U


def _selection_rule(A: np.ndarray, modes: list) -> np.ndarray:
    """Zero the entries forbidden by symmetry: a ball commutes with the antipodal map
    and the form amplitude couples degrees ``l`` and ``l, l +- 2`` only.

    Roundoff in those entries would otherwise be amplified by ``h_l(lam r) ~ (lam r)^{-l}``
    at small ``lam``.
    """
    deg = np.array([m.l for m in modes])
    diff = np.abs(deg[:, None] - deg[None, :])
    A = A.copy()
    A[(diff % 2 == 1) | (diff > 2)] = 0.0
    return A


def disc_p1_block(lmax: int, R: float, lam) -> ScatteringBlock:
    """Relative 1-form amplitude block for the disc on ``ModeSet(2, 1, lmax)``.

    Built sector-by-sector in the rotating frame, then conjugated to the real basis.
    """
    lam = as_logcx(lam)
    L = lmax + 2
    labels, U = _disc_complex_change(L)
    pos = {lab: k for k, lab in enumerate(labels)}
    K = len(labels)
    Ac = np.zeros((K, K), dtype=complex)
    for n in range(-L - 1, L + 2):
        a, b = (n - 1, +1), (n + 1, -1)
        if a not in pos or b not in pos:
            continue
        T = disc_p1_sector(n, R, lam)
        ia, ib = pos[a], pos[b]
        Ac[np.ix_([ia, ib], [ia, ib])] = T
    ms = ModeSet(2, 1, L)
    Ar = _selection_rule(U.conj().T @ Ac @ U, ms.modes)
    blk = ScatteringBlock(lam, ms.modes, Ar, {"construction": "disc-p1-rotating-frame", "R": R})
    return blk.restrict(lmax)


# --------------------------------------------------------------------------------------
# channel projectors (radial / tangential decomposition)
# --------------------------------------------------------------------------------------

def _orth(cols: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    if cols.size == 0:
        return cols.reshape(cols.shape[0], 0)
    U, s, _ = np.linalg.svd(cols, full_matrices=False)
    return U[:, s > tol * max(s[0], 1e-300)]


def _null(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > tol * max(s[0] if s.size else 0, 1e-300)))
    return Vh[rank:].conj().T


@lru_cache(maxsize=16)
def _radial_patterns(d: int, L: int):
    """Columns ``dr ^ Y_{J,k}`` in ``ModeSet(d,1,L+1)`` for ``J <= L`` (keyed by J)."""
    W = hm.dr_wedge_matrix(d, 0, L)
    src = ModeSet(d, 0, L)
    out = {}
    for J in range(L + 1):
        out[J] = W[:, src.slice(J)]
    return out


@lru_cache(maxsize=16)
def _ball_tangential_patterns(L: int):
    """TE (``M_J``) and TM (``N_J``) orthonormal pattern bases in ``ModeSet(3,1,L+1)``."""
    ms = ModeSet(3, 1, L + 1)
    I = hm.iota_dr_matrix(3, 1, L + 1)  # to scalars up to L+2
    n = len(ms)
    te, tm = {}, {}
    for J in range(0, L + 2):
        sl = ms.slice(J)
        Z = _null(I[:, sl])
        full = np.zeros((n, Z.shape[1]))
        full[sl, :] = Z
        te[J] = full
    for J in range(1, L + 1):
        idx = np.zeros(n, dtype=bool)
        for k in (J - 1, J + 1):
            if 0 <= k <= L + 1:
                idx[ms.slice(k)] = True
        cols = np.where(idx)[0]
        Z = _null(I[:, cols])
        T = np.zeros((n, Z.shape[1]))
        T[cols, :] = Z
        Mte = np.concatenate([te[k] for k in (J - 1, J + 1) if 0 <= k <= L + 1], axis=1)
        P = T - Mte @ (Mte.T @ T)
        Q = _orth(P)
        tm[J] = Q
    return te, tm


def ball3d_p1_block(lmax: int, R: float, lam, return_channels: bool = False):
    """Relative 1-form amplitude block for the 3-ball on ``ModeSet(3, 1, lmax)``.

    ``A = sum_J a^D_J P_grad(J) + a^TE_J P_TE(J) + a^TM_J P_TM(J)`` where the
    projectors act on radial patterns ``dr ^ Y_J`` and the two tangential families.
    """
    lam = as_logcx(lam)
    L = lmax + 1
    ms = ModeSet(3, 1, L + 1)
    rad = _radial_patterns(3, L)
    te, tm = _ball_tangential_patterns(L)
    A = np.zeros((len(ms), len(ms)), dtype=complex)
    chans = []
    for J in range(0, L + 1):
        aD = scalar_amplitude(3, "dirichlet", J, R, lam)
        A += aD * rad[J] @ rad[J].T
        chans.append(Channel("grad", J, 3, R, multiplicity=2 * J + 1))
        if J >= 1 and J <= L:
            aTE = te_amplitude(J, R, lam)
            A += aTE * te[J] @ te[J].T
            chans.append(Channel("te", J, 3, R, multiplicity=2 * J + 1))
        if J >= 1 and J in tm:
            aTM = tm_amplitude(J, R, lam)
            A += aTM * tm[J] @ tm[J].T
            chans.append(Channel("tm", J, 3, R, multiplicity=2 * J + 1))
    A = _selection_rule(A, ms.modes)
    blk = ScatteringBlock(lam, ms.modes, A, {"construction": "ball3d-p1-channels", "R": R}).restrict(lmax)
    return (blk, chans) if return_channels else blk


def ball3d_p2_block(lmax: int, R: float, lam) -> ScatteringBlock:
    """Relative 2-form block for the 3-ball, ``A = * A_abs *^{-1}``.

    ``*`` maps relative 2-forms to absolute 1-forms, whose channels are: radial
    patterns with Neumann amplitude, the TE family with the ``(x z)' = 0``
    amplitude and the TM family with the ``z = 0`` amplitude.
    """
    lam = as_logcx(lam)
    L = lmax + 1
    ms1 = ModeSet(3, 1, L + 1)
    rad = _radial_patterns(3, L)
    te, tm = _ball_tangential_patterns(L)
    A = np.zeros((len(ms1), len(ms1)), dtype=complex)
    for J in range(0, L + 1):
        A += scalar_amplitude(3, "neumann", J, R, lam) * rad[J] @ rad[J].T
        if J >= 1:
            A += tm_amplitude(J, R, lam) * te[J] @ te[J].T
        if J in tm:
            A += te_amplitude(J, R, lam) * tm[J] @ tm[J].T
    St = hm.hodge_star_matrix(3, 1, L + 1)
    A2 = St @ A @ St.T
    ms2 = ModeSet(3, 2, L + 1)
    A2 = _selection_rule(A2, ms2.modes)
    return ScatteringBlock(lam, ms2.modes, A2, {"construction": "ball3d-p2-channels", "R": R}).restrict(lmax)


def disc_p1_potential_block(lmax: int, R: float, lam) -> ScatteringBlock:
    """Disc 1-form block from the decomposition into exact (Dirichlet) and
    co-exact (Neumann, through the volume form) parts: radial patterns
    ``dr ^ Y`` scatter with Dirichlet amplitudes, tangential patterns
    ``iota_dr (Y vol)`` with Neumann amplitudes."""
    lam = as_logcx(lam)
    L = lmax + 1
    ms = ModeSet(2, 1, L + 1)
    Wr = hm.dr_wedge_matrix(2, 0, L)
    It = hm.iota_dr_matrix(2, 2, L)
    src = ModeSet(2, 0, L)
    A = np.zeros((len(ms), len(ms)), dtype=complex)
    for l in range(L + 1):
        sl = src.slice(l)
        aD = scalar_amplitude(2, "dirichlet", l, R, lam)
        aN = scalar_amplitude(2, "neumann", l, R, lam)
        A += aD * Wr[:, sl] @ Wr[:, sl].T + aN * It[:, sl] @ It[:, sl].T
    return ScatteringBlock(lam, ms.modes, A, {"construction": "disc-p1-potential", "R": R}).restrict(lmax)


# --------------------------------------------------------------------------------------
# generic mode matching
# --------------------------------------------------------------------------------------

def _radial_values(kind: str, d: int, ls: np.ndarray, lam: LogComplex, R: float) -> np.ndarray:
    cache = {}
    out = np.empty(len(ls), dtype=complex)
    for i, l in enumerate(ls):
        l = int(l)
        if l not in cache:
            cache[l] = complex(sph_radial(kind, d, l, lam, R)) * (-1j) ** l
        out[i] = cache[l]
    return out


def _clean_product(A: np.ndarray, B: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """``A @ B`` with entries (and whole rows) lost to cancellation set to zero.

    An entry is dropped when it is below ``tol`` times the corresponding entry
    of ``|A| @ |B|``; a row is dropped when its largest entry is below ``tol``
    times the largest bound in that row.
    """
    P = A @ B
    bound = np.abs(A) @ np.abs(B)
    P[np.abs(P) <= tol * bound] = 0.0
    dead = np.max(np.abs(P), axis=1) <= tol * np.max(bound, axis=1)
    P[dead] = 0.0
    return P


def mode_matching_block(d: int, p: int, R: float, lam, lmax: int, extra: int = 2) -> ScatteringBlock:
    """Solve the relative boundary conditions at ``r = R`` directly in mode space.

    Unknown outgoing coefficients live on degrees ``<= lmax + extra``; the
    equations are the mode projections of ``dr ^ E|_R = 0`` and
    ``dr ^ delta E|_R = 0`` (tangential part of the codifferential).  Returns the block restricted to
    ``lmax`` and stores the worst relative equation residual in ``meta``.
    """
    lam = as_logcx(lam)
    L = lmax + extra
    ms = ModeSet(d, p, L)
    deg = ms.degrees()
    hj = 2.0 * _radial_values("j", d, deg, lam, R)
    hh = _radial_values("h1", d, deg, lam, R)
    rows_M, rows_N = [], []
    if p < d:
        W = hm.dr_wedge_matrix(d, p, L)
        rows_M.append(W * hh[None, :])
        rows_N.append(W * hj[None, :])
    if p >= 1:
        I = hm.iota_dr_matrix(d, p, L)
        degk = ModeSet(d, p - 1, L + 1).degrees()
        hk = _radial_values("h1", d, degk, lam, R)
        jk = 2.0 * _radial_values("j", d, degk, lam, R)
        if p == 1:
            # delta E is a function: its tangential part is all of it
            rows_M.append(I * hk[:, None])
            rows_N.append(I * jk[:, None])
        else:
            # tangential part of delta E: dr ^ h~(iota_dr Psi), output-degree radial factors
            Wm = hm.dr_wedge_matrix(d, p - 1, L + 1)
            rows_M.append(_clean_product(Wm, I * hk[:, None]))
            rows_N.append(_clean_product(Wm, I * jk[:, None]))
            rows_N[-1][~np.any(rows_M[-1] != 0, axis=1)] = 0.0
    M = np.concatenate(rows_M)
    N = np.concatenate(rows_N)
    # scale unknowns by the outgoing radial values and rows to unit max
    colscale = np.where(np.abs(hh) > 0, 1.0 / np.abs(hh), 1.0)
    Ms = M * colscale[None, :]
    rs = np.max(np.abs(Ms), axis=1)
    keep = rs > 0
    Ms = Ms[keep] / rs[keep, None]
    Ns = N[keep] / rs[keep, None]
    Y, *_ = np.linalg.lstsq(Ms, -Ns, rcond=None)
    A = Y * colscale[:, None]
    res = np.linalg.norm(Ms @ Y + Ns, axis=0) / np.maximum(np.linalg.norm(Ns, axis=0), 1e-300)
    inner = deg <= lmax
    blk = ScatteringBlock(lam, ms.modes, A, {"construction": "mode-matching", "R": R,
                                              "max_residual": float(np.max(res[inner]))})
    return blk.restrict(lmax)


# --------------------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------------------

def scattering_block(geom: Ball, lam, lmax: int) -> ScatteringBlock:
    """Amplitude block for ``geom`` at ``lam`` on all modes of degree ``<= lmax``."""
    lam = as_logcx(lam)
    sbc = geom.scalar_bc
    if sbc is not None:
        return scalar_block(geom.d, sbc, geom.R, lam, lmax, p=geom.p)
    if geom.d == 2 and geom.p == 1:
        return disc_p1_block(lmax, geom.R, lam)
    if geom.d == 3 and geom.p == 1:
        return ball3d_p1_block(lmax, geom.R, lam)
    if geom.d == 3 and geom.p == 2:
        return ball3d_p2_block(lmax, geom.R, lam)
    raise UnsupportedError(f"no scattering construction for d={geom.d}, p={geom.p}")


# --------------------------------------------------------------------------------------
# channels and phase shifts
# --------------------------------------------------------------------------------------

@dataclass(frozen=True)
class Channel:
    """Diagonal scattering channel.

    kinds: 'scalar-dirichlet', 'scalar-neumann'; 'grad' (radial patterns
    ``dr ^ Y_l``, Dirichlet amplitude); 'te', 'tm' (3-ball tangential families);
    'disc-p1' (disc tangential patterns ``iota_dr(Y_l vol)``, Neumann amplitude).
    """

    kind: str
    l: int
    d: int
    R: float
    multiplicity: int = 1

    def amplitude(self, lam) -> complex:
        k = self.kind
        if k in ("scalar-dirichlet", "grad"):
            return scalar_amplitude(self.d, "dirichlet", self.l, self.R, lam)
        if k in ("scalar-neumann", "disc-p1"):
            return scalar_amplitude(self.d, "neumann", self.l, self.R, lam)
        if k == "te":
            return te_amplitude(self.l, self.R, lam)
        if k == "tm":
            return tm_amplitude(self.l, self.R, lam)
        raise ConfigurationError(f"unknown channel kind {k!r}")

    def radial_data(self, lam) -> dict:
        """Incoming/outgoing radial coefficients of the channel solution (unit incoming j-part)."""
        a = self.amplitude(lam)
        return {"incoming_j": 2.0, "outgoing_h1": a, "S": 1.0 + a}


def channels(geom: Ball, lmax: int) -> list:
    """Diagonal channels of ``geom`` with degree ``<= lmax`` and their multiplicities."""
    d, R = geom.d, geom.R
    sbc = geom.scalar_bc
    out = []
    if sbc is not None:
        for l in range(lmax + 1):
            out.append(Channel(f"scalar-{sbc}", l, d, R, hm.scalar_dim(d, l)))
        return out
    if d == 2 and geom.p == 1:
        for l in range(lmax + 1):
            out.append(Channel("grad", l, 2, R, hm.scalar_dim(2, l)))
            out.append(Channel("disc-p1", l, 2, R, hm.scalar_dim(2, l)))
        return out
    if d == 3 and geom.p == 1:
        for l in range(lmax + 1):
            out.append(Channel("grad", l, 3, R, 2 * l + 1))
            if l >= 1:
                out.append(Channel("te", l, 3, R, 2 * l + 1))
                out.append(Channel("tm", l, 3, R, 2 * l + 1))
        return out
    raise UnsupportedError(f"no channel decomposition for d={d}, p={geom.p}")


def phase_shift(channel: Channel, lam_grid: Sequence[float], max_jump: float = math.pi / 4) -> np.ndarray:
    """Continuous phase shifts ``delta`` with ``1 + a = e^{2 i delta}`` on an increasing grid.

    Unwrapping is modulo ``pi``, so an unwrapped step can never exceed ``pi/2``;
    steps above ``max_jump`` are treated as ambiguous and rejected.
    The branch is fixed so that ``delta`` at the first grid point lies in
    ``(-pi/2, pi/2]`` (normalization ``delta(0+) = 0`` for channels with ``a(0+) = 0``).
    """
    lam_grid = np.asarray(lam_grid, dtype=float)
    if np.any(np.diff(lam_grid) <= 0) or lam_grid[0] <= 0:
        raise ConfigurationError("phase_shift needs an increasing grid of positive lambdas")
    s = np.array([1.0 + channel.amplitude(LogComplex(l)) for l in lam_grid])
    half = 0.5 * np.angle(s)
    # unwrap with period pi (half-angle)
    delta = 0.5 * np.unwrap(2 * half)
    jumps = np.abs(np.diff(delta))
    if jumps.size and np.max(jumps) > max_jump:
        k = int(np.argmax(jumps))
        raise RefineGridError(
            f"phase jump {jumps[k]:.3f} > {max_jump:.3f} between lambda={lam_grid[k]:.4g} and {lam_grid[k + 1]:.4g}"
        )
    shift = math.pi * np.round(delta[0] / math.pi)
    return delta - shift


# --------------------------------------------------------------------------------------
# generalized eigenfunctions
# --------------------------------------------------------------------------------------

def _as_coeffs(phi) -> dict:
    if isinstance(phi, Mode):
        return {phi: 1.0}
    return dict(phi)


def eigenfunction_eval(phi, lam, x, geom: Ball, block: ScatteringBlock | None = None, lmax: int | None = None):
    """``E_lam(Phi)(x) = j~_lam(Phi) + h~^{(1)}_lam(A_lam Phi)`` at exterior Cartesian points."""
    lam = as_logcx(lam)
    coeffs = _as_coeffs(phi)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(np.linalg.norm(X, axis=1) < geom.R * (1 - 1e-12)):
        raise ConfigurationError("eigenfunction evaluation points must be exterior (r >= R)")
    lphi = max(m.l for m in coeffs)
    if block is None:
        lmax = (lphi + 2) if lmax is None else lmax
        block = scattering_block(geom, lam, lmax)
    Aphi = block.apply(coeffs)
    out = hm.synth_j(lam, coeffs, X)
    if Aphi:
        out = out + hm.synth_h1(lam, Aphi, X)
    return out


def boundary_residual(phi, lam, geom: Ball, npts: int = 64, block=None) -> float:
    """Max of ``|dr ^ E|`` (and ``|dr ^ delta E|`` via the interior identity for p>=1) at
    random boundary collocation points, relative to the incoming field size."""
    lam = as_logcx(lam)
    coeffs = _as_coeffs(phi)
    rng = np.random.default_rng(12345)
    th = rng.normal(size=(npts, geom.d))
    th /= np.linalg.norm(th, axis=1)[:, None]
    X = geom.R * th
    lphi = max(m.l for m in coeffs)
    if block is None:
        block = scattering_block(geom, lam, lphi + 2)
    E = eigenfunction_eval(coeffs, lam, X, geom, block=block)
    scale = np.max(np.abs(hm.synth_j(lam, coeffs, X))) + 1e-300
    res = 0.0
    if geom.p < geom.d and geom.scalar_bc != "neumann":
        res = max(res, float(np.max(np.abs(hm.pointwise_wedge(th, E, geom.d, geom.p)))) / scale)
    if geom.p >= 1:
        # delta E = i lam ( j~(iota_dr Phi) + h~(iota_dr A Phi) )
        L = block.degrees().max()
        Ivec = hm.iota_dr_matrix(geom.d, geom.p, int(L))
        ms_in = ModeSet(geom.d, geom.p, int(L))
        ms_out = ModeSet(geom.d, geom.p - 1, int(L) + 1)
        v = ms_in.vector({m: c for m, c in coeffs.items()})
        av = ms_in.vector(block.apply(coeffs))
        dj = hm.synth_j(lam, (ms_out, Ivec @ v), X)
        dh = hm.synth_h1(lam, (ms_out, Ivec @ av), X)
        tang = hm.pointwise_wedge(th, dj + dh, geom.d, geom.p - 1)
        res = max(res, float(np.max(np.abs(tang))) / scale)
    return res
