"""Determinants and characteristic polynomials, exact and floating."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.linalg

from .scalars import GaussianRational, common_denominator, normalize


class DimensionError(ValueError):
    pass


def as_square_rows(M) -> list[list]:
    rows = [list(r) for r in M]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise DimensionError(f"expected a non-empty square matrix, got {n} rows of lengths {[len(r) for r in rows]}")
    return rows


def _exact_div(a, b):
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        assert r == 0, "Bareiss division must be exact"
        return q
    return a / b


def bareiss_det(M):
    """Determinant of an exact matrix by fraction-free Bareiss elimination.

    Rows are first scaled to integer (or Gaussian-integer) entries by their
    common denominator; the scale is divided back out at the end.
    """
    rows = as_square_rows(M)
    n = len(rows)
    scale = Fraction(1)
    work = []
    for r in rows:
        d = common_denominator(r)
        scale *= d
        if any(isinstance(x, GaussianRational) for x in r):
            work.append([GaussianRational.coerce(x) * d for x in r])
        else:
            work.append([int(Fraction(x) * d) for x in r])
    if any(isinstance(x, GaussianRational) for r in work for x in r):
        work = [[GaussianRational.coerce(x) for x in r] for r in work]

    sign = 1
    prev = 1
    for k in range(n - 1):
        if work[k][k] == 0:
            for i in range(k + 1, n):
                if work[i][k] != 0:
                    work[k], work[i] = work[i], work[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        pivot = work[k][k]
        for i in range(k + 1, n):
            wi, wk = work[i], work[k]
            for j in range(k + 1, n):
                wi[j] = _exact_div(wi[j] * pivot - wi[k] * wk[j], prev)
            wi[k] = 0
        prev = pivot
    det = work[n - 1][n - 1] * sign
    if isinstance(det, int):
        return Fraction(det) / scale
    return normalize(det / scale)


def lu_det(M) -> complex | float:
    """Floating determinant via LAPACK LU with partial pivoting."""
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {A.shape}")
    d = np.linalg.det(A)
    return d.item()


def faddeev_leverrier(M) -> list:
    """Exact characteristic polynomial coefficients ``[c_0, ..., c_{n-1}]`` (monic, leading 1 omitted).

    det(xI - M) = x^n + c_{n-1} x^{n-1} + ... + c_0.
    """
    A = as_square_rows(M)
    n = len(A)
    zero = Fraction(0)
    coeffs = [zero] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[zero] * n for _ in range(n)]
    for k in range(1, n + 1):
        # Mk <- A @ M_{k-1} + c_{n-k+1} I
        AM = [[sum((A[i][t] * Mk[t][j] for t in range(n)), zero) for j in range(n)] for i in range(n)]
        for i in range(n):
            AM[i][i] = AM[i][i] + coeffs[n - k + 1]
        Mk = AM
        tr = sum((sum((A[i][t] * Mk[t][i] for t in range(n)), zero) for i in range(n)), zero)
        coeffs[n - k] = normalize(-tr / k)
    return [normalize(c) for c in coeffs[:n]]


def hessenberg_charpoly(M) -> np.ndarray:
    """Floating characteristic polynomial coefficients, low order first, leading 1 omitted.

    Reduces to upper Hessenberg form H and runs the recurrence over the
    characteristic polynomials of the leading principal blocks of H.
    """
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {A.shape}")
    dtype = np.complex128 if np.iscomplexobj(A) else np.float64
    H = scipy.linalg.hessenberg(A.astype(dtype))
    n = H.shape[0]
    # polys[k] holds p_k low-order first, length k+1
    polys = [np.ones(1, dtype=dtype)]
    for k in range(1, n + 1):
        pk = np.zeros(k + 1, dtype=dtype)
        pk[1:] += polys[k - 1]
        pk[:k] -= H[k - 1, k - 1] * polys[k - 1]
        sub = 1.0
        for i in range(k - 1, 0, -1):
            sub = sub * H[i, i - 1]
            term = H[i - 1, k - 1] * sub
            pk[: i] -= term * polys[i - 1]
        polys.append(pk)
    return polys[n][:n]
