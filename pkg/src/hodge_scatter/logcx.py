"""Points on the logarithmic cover of the punctured plane.

A :class:`LogComplex` stores a modulus and an *unreduced* argument, so
``rotate_pi`` applied twice lands on a different sheet than the starting
point.  The origin is adjoined as a single point (modulus 0, argument 0).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = ["LogComplex", "rotate_pi", "conjugate", "log", "project", "neg_log", "as_logcx"]


@dataclass(frozen=True)
class LogComplex:
    """A point ``modulus * exp(i * arg)`` on the logarithmic cover."""

    modulus: float
    arg: float = 0.0

    def __post_init__(self):
        m = float(self.modulus)
        a = float(self.arg)
        if not (math.isfinite(m) and math.isfinite(a)):
            raise DomainError("LogComplex requires finite modulus and argument")
        if m < 0:
            raise DomainError(f"modulus must be nonnegative, got {m}")
        if m == 0.0:
            a = 0.0
        object.__setattr__(self, "modulus", m)
        object.__setattr__(self, "arg", a)

    # -- convenience constructors -------------------------------------------------
    @classmethod
    def real(cls, x: float) -> "LogComplex":
        """Positive real ``x`` on the principal sheet."""
        if x < 0:
            raise DomainError("use LogComplex(|x|, pi) for negative reals")
        return cls(x, 0.0)

    @classmethod
    def from_json(cls, obj: dict) -> "LogComplex":
        return cls(obj["modulus"], obj.get("arg", 0.0))

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "arg": self.arg}

    @property
    def is_origin(self) -> bool:
        return self.modulus == 0.0

    def _require_nonzero(self, op: str):
        if self.modulus == 0.0:
            raise DomainError(f"{op} is undefined at the adjoined origin")

    # -- operations -----------------------------------------------------------------
    def rotate_pi(self) -> "LogComplex":
        self._require_nonzero("rotate_pi")
        return LogComplex(self.modulus, self.arg + math.pi)

    def rotate(self, angle: float) -> "LogComplex":
        """Multiply by ``exp(i*angle)`` on the cover."""
        self._require_nonzero("rotate")
        return LogComplex(self.modulus, self.arg + angle)

    def conjugate(self) -> "LogComplex":
        self._require_nonzero("conjugate")
        return LogComplex(self.modulus, -self.arg)

    def scale(self, s: float) -> "LogComplex":
        """Multiply by a positive real ``s`` (stays on the same sheet)."""
        if s <= 0:
            raise DomainError("scale factor must be positive")
        return LogComplex(self.modulus * s, self.arg)

    def log(self) -> complex:
        self._require_nonzero("log")
        return complex(math.log(self.modulus), self.arg)

    def neg_log(self) -> complex:
        return -self.log()

    def project(self) -> complex:
        if self.modulus == 0.0:
            return 0j
        return self.modulus * cmath.exp(1j * self.arg)

    def power(self, s: complex) -> complex:
        """``z**s`` defined through the single-valued cover logarithm."""
        if self.modulus == 0.0:
            if s == 0:
                return 1.0 + 0j
            if complex(s).real > 0:
                return 0j
            raise DomainError("non-positive power of the origin")
        return cmath.exp(s * self.log())

    def __mul__(self, other):
        if isinstance(other, LogComplex):
            if self.is_origin or other.is_origin:
                return LogComplex(0.0)
            return LogComplex(self.modulus * other.modulus, self.arg + other.arg)
        if isinstance(other, (int, float)) and other > 0:
            return LogComplex(self.modulus * other, self.arg)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"LogComplex({self.modulus!r}, {self.arg!r})"


def as_logcx(z) -> LogComplex:
    """Coerce a positive real, a complex number (principal sheet) or LogComplex."""
    if isinstance(z, LogComplex):
        return z
    if isinstance(z, (int, float)):
        if z >= 0:
            return LogComplex(float(z), 0.0)
        return LogComplex(-float(z), math.pi)
    z = complex(z)
    if z == 0:
        return LogComplex(0.0)
    return LogComplex(abs(z), cmath.phase(z))


def rotate_pi(z: LogComplex) -> LogComplex:
    return z.rotate_pi()


def conjugate(z: LogComplex) -> LogComplex:
    return z.conjugate()


def log(z: LogComplex) -> complex:
    return z.log()


def project(z: LogComplex) -> complex:
    return z.project()


def neg_log(z: LogComplex) -> complex:
    return z.neg_log()
