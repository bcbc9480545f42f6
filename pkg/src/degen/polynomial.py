"""Monic polynomials, characteristic polynomials and the determinant discriminant.

A polynomial is *exact* when every coefficient is an int, Fraction or
:class:`~degen.scalars.GaussianRational`; otherwise it lives in floating
point. Exact polynomials get exact discriminants, so the multiple-root test
is a plain comparison with zero. Floating polynomials are tested against a
scale-normalized threshold instead.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .linalg import DimensionError, as_square_rows, bareiss_det, faddeev_leverrier, hessenberg_charpoly, lu_det
from .scalars import is_exact, normalize, to_exact

__all__ = [
    "DEFAULT_ROOT_TOL",
    "DegreeError",
    "DimensionError",
    "Polynomial",
    "build_discriminant_matrix",
    "characteristic_polynomial",
    "discriminant",
    "discriminant_from_roots",
    "discriminant_scale",
    "has_multiple_root",
]

DEFAULT_ROOT_TOL = 1e-10


class DegreeError(ValueError):
    pass


def _float_scalar(a):
    z = complex(a)
    return z if z.imag != 0 else z.real


@dataclass(frozen=True)
class Polynomial:
    """``x^n + a_{n-1} x^{n-1} + ... + a_0`` stored as ``coeffs = (a_0, ..., a_{n-1})``."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        if len(coeffs) == 0:
            raise DegreeError("a monic polynomial needs degree n >= 1")
        if all(is_exact(a) for a in coeffs):
            coeffs = tuple(normalize(to_exact(a)) for a in coeffs)
        else:
            coeffs = tuple(_float_scalar(a) for a in coeffs)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_coefficients(cls, coeffs: Sequence) -> "Polynomial":
        """Build from all n+1 coefficients, low order first; the last must be 1."""
        coeffs = list(coeffs)
        if len(coeffs) < 2:
            raise DegreeError("a monic polynomial needs degree n >= 1")
        if coeffs[-1] != 1:
            raise ValueError(f"polynomial is not monic: leading coefficient {coeffs[-1]!r}")
        return cls(tuple(coeffs[:-1]))

    @classmethod
    def from_roots(cls, roots: Sequence) -> "Polynomial":
        roots = list(roots)
        if not roots:
            raise DegreeError("need at least one root")
        exact = all(is_exact(r) for r in roots)
        one = Fraction(1) if exact else 1.0
        full = [one]  # low order first, currently the constant polynomial 1
        for r in roots:
            r = to_exact(r) if exact else r
            nxt = [0 * one] * (len(full) + 1)
            for k, a in enumerate(full):
                nxt[k + 1] = nxt[k + 1] + a
                nxt[k] = nxt[k] - r * a
            full = nxt
        return cls(tuple(full[:-1]))

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @property
    def exact(self) -> bool:
        return all(is_exact(a) for a in self.coeffs)

    def full_coefficients(self) -> list:
        """All coefficients, low order first, including the leading 1."""
        return list(self.coeffs) + [Fraction(1) if self.exact else 1.0]

    def __call__(self, x):
        acc = 1
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def roots(self) -> np.ndarray:
        """Numeric roots (companion matrix eigenvalues)."""
        high_first = [complex(a) for a in reversed(self.full_coefficients())]
        return np.roots(high_first)


def characteristic_polynomial(M, exact: bool | None = None) -> Polynomial:
    """``det(x I - M)`` as a monic Polynomial.

    With ``exact=None`` the mode follows the entries: Python ints, Fractions
    and Gaussian rationals give an exact result (Faddeev-LeVerrier); anything
    else goes through Hessenberg reduction in floating point. ``exact=True``
    converts floats to their exact binary values first.
    """
    if isinstance(M, np.ndarray):
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
            raise DimensionError(f"expected a non-empty square matrix, got shape {M.shape}")
        if exact is None:
            exact = M.dtype.kind in "iu" or M.dtype == object and all(is_exact(x) for x in M.flat)
        rows = M.tolist()
    else:
        rows = as_square_rows(M)
        if exact is None:
            exact = all(is_exact(x) for r in rows for x in r)
    if exact:
        return Polynomial(tuple(faddeev_leverrier([[to_exact(x) for x in r] for r in rows])))
    A = np.array(rows, dtype=np.complex128 if any(isinstance(x, complex) for r in rows for x in r) else np.float64)
    return Polynomial(tuple(hessenberg_charpoly(A)))


def build_discriminant_matrix(p: Polynomial) -> list[list]:
    """The (2n-1)x(2n-1) matrix whose determinant, up to sign, is the discriminant.

    The first n-1 rows hold ``1, a_{n-1}, ..., a_0`` shifted one column right
    per row; the last n rows hold the derivative coefficients
    ``n, b_{n-1}, ..., b_1`` with ``b_k = k a_k``, shifted the same way.
    """
    n = p.degree
    if n < 1:
        raise DegreeError("degree must be >= 1")
    zero = Fraction(0) if p.exact else 0.0
    one = Fraction(1) if p.exact else 1.0
    size = 2 * n - 1
    upper = [one] + [p.coeffs[k] for k in range(n - 1, -1, -1)]
    lower = [n * one] + [k * p.coeffs[k] for k in range(n - 1, 0, -1)]
    rows = []
    for i in range(n - 1):
        row = [zero] * size
        row[i : i + n + 1] = upper
        rows.append(row)
    for i in range(n):
        row = [zero] * size
        row[i : i + n] = lower
        rows.append(row)
    return rows


def discriminant(p: Polynomial):
    n = p.degree
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    mat = build_discriminant_matrix(p)
    if p.exact:
        return normalize(sign * bareiss_det(mat))
    dtype = np.complex128 if any(isinstance(a, complex) for a in p.coeffs) else np.float64
    return sign * lu_det(np.array(mat, dtype=dtype))


def discriminant_from_roots(roots: Sequence):
    """Product of squared pairwise root differences."""
    roots = list(roots)
    if not roots:
        raise DegreeError("need at least one root")
    exact = all(is_exact(r) for r in roots)
    if exact:
        roots = [to_exact(r) for r in roots]
    acc = Fraction(1) if exact else 1.0
    for a, b in combinations(roots, 2):
        d = a - b
        acc = acc * d * d
    return normalize(acc) if exact else acc


def discriminant_scale(p: Polynomial) -> float:
    """``max(1, max|a_k|)^(2n-2)``: the discriminant is weighted-homogeneous of that degree."""
    m = max([1.0] + [abs(complex(a)) for a in p.coeffs])
    return m ** (2 * p.degree - 2)


def has_multiple_root(p: Polynomial, tol: float = DEFAULT_ROOT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    d = discriminant(p)
    if p.exact:
        return d == 0
    return abs(d) <= tol * discriminant_scale(p)
