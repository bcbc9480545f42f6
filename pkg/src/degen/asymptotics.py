"""Limit predictions and the factorial-moment toolkit behind them.

Isolated points drive everything: in the sparse regime their count is
asymptotically Poisson, and the probability that a Bernoulli-masked matrix
has distinct eigenvalues tends to P(Poisson <= 1).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

__all__ = [
    "Prediction",
    "alternating_binomial_identity",
    "bonferroni_bounds",
    "expected_isolated_asym",
    "expected_isolated_sym",
    "factorial_moment",
    "factorial_moment_from_indicators",
    "gen_binomial",
    "indicator_product_sums",
    "lambda_of",
    "mu_of",
    "p_of_n",
    "poisson_pmf",
    "predict_distinct",
    "predict_perfect_matching",
]


def lambda_of(c: float) -> float:
    """Poisson intensity of isolated points in the asymmetric model, ``2 e^-c``."""
    return 2.0 * math.exp(-c)


def mu_of(c: float, q_inf: float) -> float:
    """Symmetric-model intensity ``(1 - q_inf) e^-c``."""
    if not 0.0 <= q_inf <= 1.0:
        raise ValueError(f"q_inf must lie in [0, 1], got {q_inf}")
    return (1.0 - q_inf) * math.exp(-c)


def p_of_n(n: int, c: float) -> float:
    """``(log n + c)/n`` clamped to [0, 1]; the o(1/n) slack is taken as zero."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return min(1.0, max(0.0, (math.log(n) + c) / n))


@dataclass(frozen=True)
class Prediction:
    model: str
    c: float
    q_inf: float | None
    lambda_or_mu: float
    p_distinct: float

    def to_dict(self) -> dict:
        d = asdict(self)
        key = "lambda" if self.model == "asym" else "mu"
        d[key] = d.pop("lambda_or_mu")
        return d


def predict_distinct(c: float, model: str = "asym", q_inf: float = 0.0) -> Prediction:
    """Limit probability of N distinct eigenvalues: ``e^-x (1 + x)`` at the model's intensity."""
    if model == "asym":
        x = lambda_of(c)
        q = None
    elif model == "sym":
        x = mu_of(c, q_inf)
        q = q_inf
    else:
        raise ValueError(f"model must be 'asym' or 'sym', got {model!r}")
    return Prediction(model, c, q, x, poisson_pmf(x, 0) + poisson_pmf(x, 1))


def predict_perfect_matching(c: float, model: str = "asym", q_inf: float = 0.0) -> float:
    """Limit probability of a perfect matching, ``e^-x`` (no isolated point)."""
    return math.exp(-predict_distinct(c, model, q_inf).lambda_or_mu)


def poisson_pmf(lam: float, x: int) -> float:
    if lam < 0 or x < 0:
        raise ValueError("need lambda >= 0 and x >= 0")
    if lam == 0:
        return 1.0 if x == 0 else 0.0
    if x <= 20:
        return math.exp(-lam) * lam**x / math.factorial(x)
    return math.exp(-lam + x * math.log(lam) - math.lgamma(x + 1))


def gen_binomial(x, k: int):
    """``x (x-1) ... (x-k+1) / k!``, exact for int/Fraction ``x``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    exact = isinstance(x, (int, Fraction))
    acc = Fraction(1) if exact else 1.0
    for i in range(k):
        acc *= x - i
    acc /= math.factorial(k)
    if exact and acc.denominator == 1:
        return int(acc)
    return acc


def alternating_binomial_identity(n: int, m: int) -> tuple[int, int]:
    """Both sides of ``sum_{k<=m} (-1)^k C(n+1, k) = (-1)^m C(n, m)``."""
    if n < 0 or m < 0:
        raise ValueError("need n, m >= 0")
    lhs = sum((-1) ** k * math.comb(n + 1, k) for k in range(m + 1))
    rhs = (-1) ** m * math.comb(n, m)
    return lhs, rhs


def bonferroni_bounds(betas: Sequence, j: int, ell: int):
    """Truncated inclusion-exclusion bounds on ``P(X = j)`` from factorial moments ``betas[k] = E C(X, k)``.

    The sum up to ``k = j + 2 ell + 1`` is a lower bound, the sum up to
    ``j + 2 ell`` an upper bound.
    """
    top = j + 2 * ell + 1
    if len(betas) <= top:
        raise ValueError(f"need factorial moments up to order {top}, got {len(betas)}")
    terms = [(-1) ** (k - j) * math.comb(k, j) * betas[k] for k in range(j, top + 1)]
    upper = sum(terms[:-1], 0 * betas[0])
    lower = upper + terms[-1]
    return lower, upper


def factorial_moment(pmf: Mapping[int, object], k: int):
    """``E C(X, k)`` straight from a probability mass function."""
    return sum((math.comb(x, k) * pr for x, pr in pmf.items()), 0 * next(iter(pmf.values())))


def indicator_product_sums(outcomes: Sequence[tuple[object, Sequence[int]]], max_k: int | None = None) -> dict:
    """``{k: sum over |I| = k of E prod_{j in I} B_j}`` from a joint law of 0/1 vectors.

    ``outcomes`` lists ``(probability, bits)`` pairs. Only the support of each
    outcome matters: a product over I is 1 exactly when I lies inside it.
    """
    m = len(outcomes[0][1])
    max_k = m if max_k is None else max_k
    zero = 0 * outcomes[0][0]
    sums = {k: zero for k in range(max_k + 1)}
    for pr, bits in outcomes:
        ones = [i for i, b in enumerate(bits) if b]
        for k in range(max_k + 1):
            sums[k] += pr * sum(1 for _ in combinations(ones, k))
    return sums


def factorial_moment_from_indicators(indicator_products: Mapping[int, object], k: int):
    """``E C(X, k)`` for ``X = sum B_j`` given the summed indicator products.

    The factorial moment of order k of a sum of indicators is the sum, over
    k-subsets, of the expected product; k = 0 gives 1.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 1
    return indicator_products.get(k, 0)


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _power(base, exponent: int):
    if _is_exact(base):
        return Fraction(base) ** exponent
    if base == 0:
        return 1.0 if exponent == 0 else 0.0
    return math.exp(exponent * math.log(base))


def expected_isolated_asym(n: int, p, k: int):
    """``E C(X, k)`` for the isolated-point count X of the n x n bipartite Bernoulli(p) graph.

    Choosing k1 rows and k2 columns (k1 + k2 = k) to be isolated forbids
    ``n k - k1 k2`` distinct edges.
    """
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    exact = _is_exact(p)
    acc = Fraction(0) if exact else 0.0
    for k1 in range(0, k + 1):
        k2 = k - k1
        ways = math.comb(n, k1) * math.comb(n, k2)
        if ways:
            acc += ways * _power(1 - p, n * k - k1 * k2)
    return acc


def expected_isolated_sym(n: int, p, q, k: int):
    """``E C(X, k)`` for the identified isolated-point count of the symmetric model."""
    if not (0 <= p <= 1 and 0 <= q <= 1):
        raise ValueError("p and q must lie in [0, 1]")
    if k > n:
        return Fraction(0) if _is_exact(p) and _is_exact(q) else 0.0
    forbidden = k * (k - 1) // 2 + k * (n - k)
    return math.comb(n, k) * _power(1 - q, k) * _power(1 - p, forbidden)
