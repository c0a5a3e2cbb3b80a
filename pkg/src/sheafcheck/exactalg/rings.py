"""Coefficient rings for exact linear algebra: Q, Z, and prime fields F_p.

Scalars are plain Python objects so that every computation in the package is
exact: ``fractions.Fraction`` over Q, arbitrary-precision ``int`` over Z, and
``int`` in ``[0, p)`` over F_p.  No floating point exists anywhere downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class ValidationError(ValueError):
    """Raised when a constructor invariant is violated."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Ring:
    """A coefficient ring tag: ``q`` (rationals), ``z`` (integers), ``fp`` (F_p)."""

    kind: str
    p: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("q", "z", "fp"):
            raise ValidationError(f"unknown ring kind {self.kind!r}")
        if self.kind == "fp":
            if self.p is None or not is_prime(self.p):
                raise ValidationError(f"fp ring needs a prime modulus, got {self.p!r}")
            if self.p >= 2**31:
                raise ValidationError("prime modulus too large for the exact mod-p kernel")
        elif self.p is not None:
            raise ValidationError(f"ring {self.kind!r} takes no modulus")

    # -- scalar protocol ---------------------------------------------------

    @property
    def is_field(self) -> bool:
        return self.kind in ("q", "fp")

    def zero(self):
        return Fraction(0) if self.kind == "q" else 0

    def one(self):
        return Fraction(1) if self.kind == "q" else 1

    def canon(self, value):
        """Coerce ``value`` (int, Fraction, or 'num/den' string) into this ring."""
        if isinstance(value, str):
            value = parse_rational(value)
        if isinstance(value, float):
            raise ValidationError("floating point values are not accepted")
        if self.kind == "q":
            return Fraction(value)
        frac = Fraction(value)
        if frac.denominator != 1:
            raise ValidationError(f"{value!r} is not an element of ring {self.kind}")
        n = frac.numerator
        return n % self.p if self.kind == "fp" else n

    def add(self, a, b):
        c = a + b
        return c % self.p if self.kind == "fp" else c

    def sub(self, a, b):
        c = a - b
        return c % self.p if self.kind == "fp" else c

    def mul(self, a, b):
        c = a * b
        return c % self.p if self.kind == "fp" else c

    def neg(self, a):
        return (-a) % self.p if self.kind == "fp" else -a

    def is_unit(self, a) -> bool:
        if self.kind == "z":
            return a in (1, -1)
        return a != self.zero()

    def inv(self, a):
        if self.kind == "q":
            if a == 0:
                raise ZeroDivisionError("inverse of zero")
            return Fraction(1) / a
        if self.kind == "fp":
            if a % self.p == 0:
                raise ZeroDivisionError("inverse of zero")
            return pow(a, self.p - 2, self.p)
        if a in (1, -1):
            return a
        raise ValidationError(f"{a} is not a unit in Z")

    def scalar_str(self, a) -> str:
        """Canonical string form used by the scenario serializer."""
        if self.kind == "q":
            f = Fraction(a)
            return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
        return str(a)

    def __str__(self) -> str:
        return {"q": "Q", "z": "Z"}.get(self.kind) or f"F{self.p}"


QQ = Ring("q")
ZZ = Ring("z")


def GF(p: int) -> Ring:
    return Ring("fp", p)


def parse_rational(text: str) -> Fraction:
    """Parse an exact rational written as ``'n'`` or ``'num/den'``."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def rational_str(x) -> str:
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
