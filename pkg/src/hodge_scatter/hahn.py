"""Truncated Hahn series in ``lam**alpha * (-log lam)**(-beta)``.

Exponents live in ``Q x Z`` (rational ``alpha`` with denominator at most
:data:`MAX_DENOMINATOR`, integer ``beta``) and are ordered lexicographically.
A :class:`HahnSeries` stores finitely many nonzero terms strictly below an
explicit truncation exponent ``trunc``; everything at or above ``trunc`` is
unknown.  ``trunc=None`` means the stored terms are the exact, complete series.

The log-bound constraint ``a_{alpha,beta} = 0 whenever -beta > C*alpha`` is
validated on construction unless the series is declared ``singular`` (series
with negative powers of ``-log lam`` at ``alpha = 0`` or with negative
``alpha``, as produced by inversion).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, IllConditionedError, RangeError
from .logcx import LogComplex, as_logcx

__all__ = [
    "MAX_DENOMINATOR",
    "DEFAULT_LOGBOUND",
    "HahnExponent",
    "HahnSeries",
    "FitResult",
    "LeadingExponentEstimate",
    "add",
    "mul",
    "scale",
    "invert",
    "evaluate",
    "fit",
    "estimate_leading_exponent",
    "estimate_leading_exponent_detail",
    "design_matrix",
]

MAX_DENOMINATOR = 2
DEFAULT_LOGBOUND = 8.0


@dataclass(frozen=True, order=True)
class HahnExponent:
    """Exponent ``(alpha, beta)`` of the monomial ``lam**alpha * (-log lam)**(-beta)``."""

    alpha: Fraction
    beta: int = 0

    def __post_init__(self):
        a = Fraction(self.alpha).limit_denominator(10**6) if isinstance(self.alpha, float) else Fraction(self.alpha)
        if a.denominator > MAX_DENOMINATOR:
            raise RangeError(f"alpha={a} has denominator > {MAX_DENOMINATOR}")
        if int(self.beta) != self.beta:
            raise RangeError("beta must be an integer")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", int(self.beta))

    def __add__(self, other: "HahnExponent") -> "HahnExponent":
        return HahnExponent(self.alpha + other.alpha, self.beta + other.beta)

    def __sub__(self, other: "HahnExponent") -> "HahnExponent":
        return HahnExponent(self.alpha - other.alpha, self.beta - other.beta)

    def __neg__(self) -> "HahnExponent":
        return HahnExponent(-self.alpha, -self.beta)

    def times(self, k: int) -> "HahnExponent":
        return HahnExponent(self.alpha * k, self.beta * k)

    def violates(self, logbound: float) -> bool:
        """True if a nonzero coefficient here breaks ``-beta <= C*alpha``."""
        return -self.beta > logbound * float(self.alpha)

    def to_json(self) -> list:
        return [self.alpha.numerator, self.alpha.denominator, self.beta]

    @classmethod
    def from_json(cls, obj) -> "HahnExponent":
        num, den, beta = obj
        return cls(Fraction(num, den), beta)

    def __repr__(self):
        return f"({self.alpha},{self.beta})"


def _E(e) -> HahnExponent:
    if isinstance(e, HahnExponent):
        return e
    a, b = e
    return HahnExponent(Fraction(a), b)


@dataclass(frozen=True)
class HahnSeries:
    """Immutable truncated Hahn series.

    Parameters
    ----------
    terms:
        Mapping or iterable of ``(exponent, coefficient)``; exponents may be
        given as ``(alpha, beta)`` tuples.  Zero coefficients are dropped.
    trunc:
        Truncation exponent (``None`` = exact).
    logbound:
        The constant ``C`` of the log-bound constraint.
    singular:
        Skip the log-bound validation (meromorphic / singular series).
    """

    terms: tuple = ()
    trunc: HahnExponent | None = None
    logbound: float = DEFAULT_LOGBOUND
    singular: bool = False

    def __init__(self, terms=(), trunc=None, logbound: float = DEFAULT_LOGBOUND, singular: bool = False):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[HahnExponent, complex] = {}
        for e, c in items:
            e = _E(e)
            acc[e] = acc.get(e, 0j) + complex(c)
        tr = None if trunc is None else _E(trunc)
        clean = tuple(sorted(((e, c) for e, c in acc.items() if c != 0 and (tr is None or e < tr)), key=lambda t: t[0]))
        if tr is not None:
            dropped = [e for e, c in acc.items() if c != 0 and e >= tr]
            if dropped:
                raise DomainError(f"terms {dropped} lie at or above trunc {tr}")
        if logbound <= 0:
            raise DomainError("logbound must be positive")
        if not singular:
            bad = [e for e, _ in clean if e.violates(logbound)]
            if bad:
                raise DomainError(
                    f"terms {bad} violate the log-bound constraint -beta <= {logbound}*alpha; "
                    "declare singular=True for meromorphic series"
                )
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "trunc", tr)
        object.__setattr__(self, "logbound", float(logbound))
        object.__setattr__(self, "singular", bool(singular))

    # -- construction helpers -----------------------------------------------------------
    @classmethod
    def _raw(cls, acc: Mapping, trunc, logbound, tol: float = 0.0) -> "HahnSeries":
        """Internal constructor: prune below trunc, mark singular if needed."""
        items = {e: c for e, c in acc.items() if abs(c) > tol and (trunc is None or e < trunc)}
        singular = any(e.violates(logbound) for e in items)
        return cls(items, trunc, logbound, singular)

    @classmethod
    def unit(cls, trunc=None) -> "HahnSeries":
        return cls({HahnExponent(0, 0): 1.0}, trunc)

    @classmethod
    def monomial(cls, alpha, beta=0, coeff: complex = 1.0, trunc=None, singular=None) -> "HahnSeries":
        e = HahnExponent(Fraction(alpha), beta)
        sing = e.violates(DEFAULT_LOGBOUND) if singular is None else singular
        return cls({e: coeff}, trunc, singular=sing)

    # -- basic queries ------------------------------------------------------------------
    def as_dict(self) -> dict:
        return dict(self.terms)

    def coeff(self, e) -> complex:
        return self.as_dict().get(_E(e), 0j)

    @property
    def is_zero(self) -> bool:
        return len(self.terms) == 0

    @property
    def lead(self) -> HahnExponent | None:
        return self.terms[0][0] if self.terms else None

    @property
    def lead_coeff(self) -> complex:
        return self.terms[0][1] if self.terms else 0j

    def exponents(self) -> list:
        return [e for e, _ in self.terms]

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        body = " + ".join(f"{c:.6g}*{e}" for e, c in self.terms) or "0"
        return f"HahnSeries({body}; trunc={self.trunc})"

    # -- arithmetic ----------------------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1.0, other))

    def __mul__(self, other):
        if isinstance(other, HahnSeries):
            return mul(self, other)
        return scale(other, self)

    def __rmul__(self, other):
        return scale(other, self)

    def __neg__(self):
        return scale(-1.0, self)

    def equals(self, other: "HahnSeries", tol: float = 0.0) -> bool:
        """Same truncation and term-wise equal coefficients (within ``tol``)."""
        if self.trunc != other.trunc:
            return False
        a, b = self.as_dict(), other.as_dict()
        for e in set(a) | set(b):
            if abs(a.get(e, 0j) - b.get(e, 0j)) > tol:
                return False
        return True

    # -- JSON ------------------------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "logbound": self.logbound,
            "trunc": None if self.trunc is None else self.trunc.to_json(),
            "singular": self.singular,
            "terms": [
                {"alpha": [e.alpha.numerator, e.alpha.denominator], "beta": e.beta, "re": c.real, "im": c.imag}
                for e, c in self.terms
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HahnSeries":
        terms = {
            HahnExponent(Fraction(t["alpha"][0], t["alpha"][1]), t["beta"]): complex(t["re"], t["im"])
            for t in obj["terms"]
        }
        trunc = None if obj.get("trunc") is None else HahnExponent.from_json(obj["trunc"])
        return cls(terms, trunc, obj.get("logbound", DEFAULT_LOGBOUND), obj.get("singular", False))

    def evaluate(self, lam, sector: float = math.pi, tail_constant: float = 1.0):
        return evaluate(self, lam, sector, tail_constant)


def _min_trunc(*ts):
    ts = [t for t in ts if t is not None]
    return min(ts) if ts else None


def add(a: HahnSeries, b: HahnSeries) -> HahnSeries:
    trunc = _min_trunc(a.trunc, b.trunc)
    acc = dict(a.terms)
    for e, c in b.terms:
        acc[e] = acc.get(e, 0j) + c
    return HahnSeries._raw(acc, trunc, max(a.logbound, b.logbound))


def scale(c: complex, a: HahnSeries) -> HahnSeries:
    c = complex(c)
    if c == 0:
        return HahnSeries._raw({}, a.trunc, a.logbound)
    return HahnSeries._raw({e: c * v for e, v in a.terms}, a.trunc, a.logbound)


def _product_trunc(a: HahnSeries, b: HahnSeries):
    cands = []
    if a.trunc is not None:
        if b.lead is not None:
            cands.append(a.trunc + b.lead)
        elif b.trunc is not None:
            cands.append(a.trunc + b.trunc)
    if b.trunc is not None:
        if a.lead is not None:
            cands.append(b.trunc + a.lead)
        elif a.trunc is not None:
            cands.append(a.trunc + b.trunc)
    return min(cands) if cands else None


def mul(a: HahnSeries, b: HahnSeries) -> HahnSeries:
    trunc = _product_trunc(a, b)
    acc: dict[HahnExponent, complex] = {}
    for ea, ca in a.terms:
        for eb, cb in b.terms:
            e = ea + eb
            if trunc is not None and e >= trunc:
                continue
            acc[e] = acc.get(e, 0j) + ca * cb
    return HahnSeries._raw(acc, trunc, max(a.logbound, b.logbound))


def invert(a: HahnSeries, trunc=None, max_iter: int = 64) -> HahnSeries:
    """Multiplicative inverse ``1/a`` up to a truncation.

    Writes ``a = c0 lam^{e0} (1 + r)`` and sums the geometric series in ``-r``.
    The returned truncation is the smallest of: the requested ``trunc``; the
    truncation implied by ``a.trunc``; and the first exponent not yet exact
    after ``max_iter`` geometric terms.
    """
    if a.is_zero:
        raise DomainError("cannot invert the zero series")
    e0, c0 = a.terms[0]
    req = None if trunc is None else _E(trunc)
    r_terms = {e - e0: c / c0 for e, c in a.terms[1:] if c / c0 != 0}  # c/c0 may underflow
    rel_trunc = None if a.trunc is None else a.trunc - e0
    if not r_terms:
        out_trunc = _min_trunc(req, None if rel_trunc is None else rel_trunc - e0)
        return HahnSeries._raw({-e0: 1.0 / c0}, out_trunc, a.logbound)
    r = HahnSeries._raw({e: -c for e, c in r_terms.items()}, rel_trunc, a.logbound)
    r_lead = r.lead
    if r_lead <= HahnExponent(0, 0):
        raise DomainError("internal: non-leading part must be of higher order")
    # relative truncation of the inverse
    rel_target = _min_trunc(rel_trunc, None if req is None else req + e0)
    total = {HahnExponent(0, 0): 1.0 + 0j}
    power = HahnSeries._raw({HahnExponent(0, 0): 1.0}, rel_target, a.logbound)
    k = 0
    exhausted = True
    while True:
        if power.is_zero:
            break
        if k >= max_iter:
            exhausted = False
            break
        power = mul(power, r)
        power = HahnSeries._raw(dict(power.terms), _min_trunc(power.trunc, rel_target), a.logbound)
        k += 1
        for e, c in power.terms:
            total[e] = total.get(e, 0j) + c
    cap = None if exhausted else r_lead.times(k + 1)
    rel_out = _min_trunc(rel_target, cap)
    if rel_out is None:
        # exact input with an infinite inverse: fall back to the iteration cap
        rel_out = r_lead.times(k + 1)
    out = {e - e0: c / c0 for e, c in total.items() if e < rel_out}
    return HahnSeries._raw(out, rel_out - e0, a.logbound)


def _monomial_values(lam: LogComplex, exps: Sequence[HahnExponent]) -> np.ndarray:
    L = lam.neg_log()
    return np.array([lam.power(float(e.alpha)) * L ** (-e.beta) for e in exps], dtype=complex)


def evaluate(a: HahnSeries, lam, sector: float = math.pi, tail_constant: float = 1.0):
    """Evaluate the stored terms at ``lam`` on the cover.

    Returns ``(value, error_bound)`` where the bound is
    ``tail_constant * |lam|^{trunc.alpha} |-log lam|^{-trunc.beta}`` (0 for exact series).
    """
    lam = as_logcx(lam)
    if lam.is_origin or lam.modulus >= 1.0:
        raise RangeError("Hahn series are evaluated for 0 < |lam| < 1")
    if abs(lam.arg) > sector:
        raise RangeError(f"|arg lam| = {abs(lam.arg)} exceeds the sector bound {sector}")
    exps = a.exponents()
    val = complex(np.dot(_monomial_values(lam, exps), [c for _, c in a.terms])) if exps else 0j
    if a.trunc is None:
        err = 0.0
    else:
        err = tail_constant * abs(lam.power(float(a.trunc.alpha)) * lam.neg_log() ** (-a.trunc.beta))
    return val, err


# --------------------------------------------------------------------------------------
# Fitting
# --------------------------------------------------------------------------------------

@dataclass
class FitResult:
    exponents: list
    coefficients: np.ndarray
    residual: float
    condition: float

    def as_dict(self) -> dict:
        return dict(zip(self.exponents, self.coefficients))

    def coeff(self, e) -> complex:
        return complex(self.as_dict()[_E(e)])

    def series(self, trunc=None) -> HahnSeries:
        return HahnSeries._raw({e: complex(c) for e, c in zip(self.exponents, self.coefficients)}, trunc,
                               DEFAULT_LOGBOUND)


def _samples(samples) -> tuple[list, np.ndarray]:
    lams = [as_logcx(l) for l, _ in samples]
    vals = np.array([complex(v) for _, v in samples], dtype=complex)
    return lams, vals


def design_matrix(lams: Sequence[LogComplex], exponents: Sequence[HahnExponent]) -> np.ndarray:
    return np.array([_monomial_values(l, exponents) for l in lams], dtype=complex).reshape(len(lams), len(exponents))


def fit(samples, exponents: Iterable, weights=None, max_condition: float = 1e12) -> FitResult:
    """Least-squares Hahn coefficients from samples ``[(lam, value), ...]``.

    Columns are normalized before solving; ``residual`` is
    ``||X c - y|| / ||y||``.  Raises :class:`IllConditionedError` when the
    normalized design has condition number above ``max_condition`` and names
    the most collinear exponent pair.
    """
    exps = [_E(e) for e in exponents]
    if len(set(exps)) != len(exps):
        raise ConfigurationError("duplicate exponents in fit")
    lams, y = _samples(samples)
    if len(lams) < 2 * len(exps):
        raise ConfigurationError(f"need at least {2 * len(exps)} samples for {len(exps)} exponents, got {len(lams)}")
    if any(l.modulus >= 1 or l.is_origin for l in lams):
        raise RangeError("fit samples must satisfy 0 < |lam| < 1")
    X = design_matrix(lams, exps)
    w = np.ones(len(lams)) if weights is None else np.asarray(weights, dtype=float)
    Xw = X * w[:, None]
    yw = y * w
    norms = np.linalg.norm(Xw, axis=0)
    Xn = Xw / norms
    s = np.linalg.svd(Xn, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    if cond > max_condition:
        G = np.abs(Xn.conj().T @ Xn)
        np.fill_diagonal(G, 0.0)
        i, j = np.unravel_index(np.argmax(G), G.shape)
        raise IllConditionedError(
            f"fit design condition {cond:.3g} > {max_condition:.1g}; most collinear exponents {exps[i]} and {exps[j]}"
        )
    cn, *_ = np.linalg.lstsq(Xn, yw, rcond=None)
    coef = cn / norms
    ynorm = np.linalg.norm(yw)
    res = float(np.linalg.norm(Xw @ coef - yw) / ynorm) if ynorm > 0 else float(np.linalg.norm(Xw @ coef))
    return FitResult(exps, coef, res, cond)


@dataclass
class LeadingExponentEstimate:
    exponent: HahnExponent
    raw_alpha: float
    raw_log_power: float
    residual_std: float


def estimate_leading_exponent_detail(samples, max_residual_std: float = 0.05) -> LeadingExponentEstimate:
    """Leading exponent from the joint regression
    ``log|f| = c + alpha*log|lam| - beta*log(-log|lam|)``.

    ``alpha`` is rounded to the nearest admissible rational (denominator <= 2);
    ``beta`` is then re-estimated after removing ``lam**alpha`` and rounded to
    an integer.
    """
    lams, y = _samples(samples)
    mods = np.array([l.modulus for l in lams])
    if np.any(mods >= 1):
        raise RangeError("samples must satisfy |lam| < 1")
    if np.log10(mods.max() / mods.min()) < 3 - 1e-9:
        raise ConfigurationError("samples must span at least 3 decades")
    if np.any(y == 0):
        raise DomainError("zero sample values cannot be used in log-log regression")
    ly = np.log(np.abs(y))
    x1 = np.log(mods)
    x2 = np.log(-np.log(mods))
    A = np.column_stack([np.ones_like(x1), x1, x2])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    raw_alpha = float(coef[1])
    alpha = Fraction(round(raw_alpha * MAX_DENOMINATOR), MAX_DENOMINATOR)
    z = ly - float(alpha) * x1
    B = np.column_stack([np.ones_like(x2), x2])
    c2, *_ = np.linalg.lstsq(B, z, rcond=None)
    raw_logpow = float(c2[1])
    beta = -int(round(raw_logpow))
    resid = z - B @ np.array([c2[0], float(-beta)])
    resid = resid - resid.mean()
    std = float(np.std(resid))
    if std > max_residual_std:
        raise IllConditionedError(
            f"leading-exponent regression did not converge (residual std {std:.3g} > {max_residual_std})"
        )
    return LeadingExponentEstimate(HahnExponent(alpha, beta), raw_alpha, raw_logpow, std)


def estimate_leading_exponent(samples, max_residual_std: float = 0.05) -> HahnExponent:
    return estimate_leading_exponent_detail(samples, max_residual_std).exponent
