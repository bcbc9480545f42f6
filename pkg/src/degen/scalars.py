"""Exact scalars: rationals via :class:`fractions.Fraction`, complex via Gaussian rationals.

Floating values are plain ``float``/``complex``; everything here is about the
exact side, where zero tests must be decisive.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from math import lcm


@dataclass(frozen=True)
class GaussianRational:
    """A complex number ``re + im*i`` with rational parts."""

    re: Fraction
    im: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(Fraction(x), Fraction(0))

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / den,
            (self.im * o.re - self.re * o.im) / den,
        )

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = GaussianRational(Fraction(1), Fraction(0))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (GaussianRational, numbers.Number)):
            try:
                o = GaussianRational.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __abs__(self):
        return abs(complex(self))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


ExactScalar = Fraction | GaussianRational


def is_exact(x) -> bool:
    """True for ints, Fractions and Gaussian rationals (bool excluded)."""
    return isinstance(x, (int, Fraction, GaussianRational)) and not isinstance(x, bool)


def to_exact(x):
    """Convert ``x`` to an exact scalar without rounding.

    Floats convert to their exact dyadic value, so ``to_exact(0.1)`` is not 1/10.
    Complex values with zero imaginary part collapse to Fractions.
    """
    if isinstance(x, GaussianRational):
        return x.re if x.im == 0 else x
    if hasattr(x, "item") and not isinstance(x, (int, float, complex)):
        x = x.item()
    if isinstance(x, complex):
        if x.imag == 0:
            return Fraction(x.real)
        return GaussianRational(Fraction(x.real), Fraction(x.imag))
    return Fraction(x)


def normalize(x):
    """Collapse a Gaussian rational with zero imaginary part to a Fraction."""
    if isinstance(x, GaussianRational) and x.im == 0:
        return x.re
    return x


def common_denominator(values) -> int:
    """Least common multiple of all denominators (real and imaginary parts)."""
    d = 1
    for v in values:
        if isinstance(v, GaussianRational):
            d = lcm(d, v.re.denominator, v.im.denominator)
        else:
            d = lcm(d, Fraction(v).denominator)
    return d


def format_exact(x) -> str:
    x = normalize(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)
