"""Bipartite masks, matchings and Hall-type structure on two copies of {0, ..., n-1}.

A mask doubles as a matrix sparsity pattern: bit ``(j, l)`` set means entry
``(j, l)`` may be nonzero, i.e. row-vertex ``j`` is joined to column-vertex
``l``. Indices are 0-based throughout.

Large-n queries (matching, the distinctness condition) run on CSR arrays
through compiled Hopcroft-Karp; subset searches (Hall violators, the two
witness conditions) use the row bitsets directly and are capped at ``EXHAUSTIVE_LIMIT``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, NamedTuple

import numpy as np

from . import _matching

__all__ = [
    "EXHAUSTIVE_LIMIT",
    "BipartiteMask",
    "ConditionWitness",
    "DeficiencyWitness",
    "ExhaustiveLimitError",
    "Matching",
    "condition_4_1",
    "condition_4_11",
    "condition_5_3",
    "format_mask_text",
    "hall_violation_witness",
    "has_perfect_matching",
    "isolated_points",
    "maximum_matching",
    "neighborhood",
    "parse_mask_text",
    "principal_subgraph",
    "tilde_neighborhood",
]

EXHAUSTIVE_LIMIT = 12


class ExhaustiveLimitError(ValueError):
    pass


def _bits(indices: Iterable[int]) -> int:
    out = 0
    for i in indices:
        out |= 1 << i
    return out


def _members(bits: int) -> frozenset[int]:
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return frozenset(out)


@dataclass(frozen=True)
class BipartiteMask:
    """Edges between n row-vertices and n column-vertices.

    ``rows[j]`` is an n-bit integer whose bit ``l`` marks the edge ``(j, l)``.
    With ``symmetric=True`` the edge set must be closed under ``(j, l) -> (l, j)``.
    """

    n: int
    rows: tuple[int, ...]
    symmetric: bool = False

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if self.n < 0 or len(rows) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(rows)}")
        limit = 1 << self.n
        if any(r < 0 or r >= limit for r in rows):
            raise ValueError(f"row bitset wider than n={self.n}")
        if self.symmetric and self.cols != rows:
            raise ValueError("symmetric flag set on a non-symmetric edge set")

    # constructors

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], symmetric: bool = False) -> "BipartiteMask":
        rows = [0] * n
        for j, l in edges:
            if not (0 <= j < n and 0 <= l < n):
                raise IndexError(f"edge ({j}, {l}) out of range for n={n}")
            rows[j] |= 1 << l
            if symmetric:
                rows[l] |= 1 << j
        return cls(n, tuple(rows), symmetric)

    @classmethod
    def from_array(cls, array, symmetric: bool | None = None) -> "BipartiteMask":
        a = np.asarray(array).astype(bool)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError(f"mask array must be square, got {a.shape}")
        if symmetric is None:
            symmetric = False
        rows = []
        for r in a:
            packed = np.packbits(r, bitorder="little")
            rows.append(int.from_bytes(packed.tobytes(), "little"))
        return cls(n, tuple(rows), symmetric)

    @classmethod
    def from_bits(cls, n: int, bits: int, symmetric: bool = False) -> "BipartiteMask":
        """Bit ``j*n + l`` of ``bits`` is edge ``(j, l)``; enumeration helper for small n."""
        full = (1 << n) - 1
        return cls(n, tuple((bits >> (j * n)) & full for j in range(n)), symmetric)

    @classmethod
    def from_csr(cls, n: int, indptr, indices, symmetric: bool = False) -> "BipartiteMask":
        a = np.zeros((n, n), dtype=bool)
        rows = np.repeat(np.arange(n), np.diff(indptr))
        a[rows, indices] = True
        return cls.from_array(a, symmetric)

    @classmethod
    def complete(cls, n: int, symmetric: bool = False) -> "BipartiteMask":
        return cls(n, ((1 << n) - 1,) * n, symmetric)

    @classmethod
    def empty(cls, n: int, symmetric: bool = False) -> "BipartiteMask":
        return cls(n, (0,) * n, symmetric)

    @classmethod
    def identity(cls, n: int) -> "BipartiteMask":
        return cls(n, tuple(1 << j for j in range(n)), True)

    # views

    @cached_property
    def cols(self) -> tuple[int, ...]:
        """Column bitsets: bit ``j`` of ``cols[l]`` marks edge ``(j, l)``."""
        cols = [0] * self.n
        for j, r in enumerate(self.rows):
            l = 0
            while r:
                if r & 1:
                    cols[l] |= 1 << j
                r >>= 1
                l += 1
        return tuple(cols)

    @property
    def bits(self) -> int:
        out = 0
        for j, r in enumerate(self.rows):
            out |= r << (j * self.n)
        return out

    def has_edge(self, j: int, l: int) -> bool:
        return bool(self.rows[j] >> l & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(j, l) for j in range(self.n) for l in sorted(_members(self.rows[j]))]

    @property
    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def to_array(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for j, l in self.edges():
            a[j, l] = True
        return a

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        return _csr_from_bitsets(self.n, self.rows)

    @cached_property
    def csr_transpose(self) -> tuple[np.ndarray, np.ndarray]:
        return _csr_from_bitsets(self.n, self.cols)

    def __str__(self):
        return format_mask_text(self)


def _csr_from_bitsets(n: int, bitsets) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = []
    for j, r in enumerate(bitsets):
        members = sorted(_members(r))
        indices.extend(members)
        indptr[j + 1] = indptr[j] + len(members)
    return indptr, np.asarray(indices, dtype=np.int64)


@dataclass(frozen=True)
class Matching:
    """Partial injective map row -> column; every pair is an edge of the host mask."""

    n: int
    pairs: dict

    @property
    def size(self) -> int:
        return len(self.pairs)

    @property
    def is_perfect(self) -> bool:
        return self.size == self.n


@dataclass(frozen=True)
class DeficiencyWitness:
    """A vertex set ``I`` on one side whose neighbourhood ``gamma`` is too small.

    ``side`` is ``"left"``, ``"right"`` or ``"index"`` (symmetric masks, where
    both sides are identified).
    """

    side: str
    I: frozenset
    gamma: frozenset

    @property
    def deficiency(self) -> int:
        return len(self.I) - len(self.gamma)


class ConditionWitness(NamedTuple):
    k: int
    side: str
    I: frozenset
    J: frozenset


def parse_mask_text(text: str) -> BipartiteMask:
    """Parse ``n [sym]`` followed by n lines of n characters from {0, 1}."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty mask text")
    head = lines[0].split()
    n = int(head[0])
    symmetric = len(head) > 1 and head[1] == "sym"
    if len(head) > 2 or (len(head) == 2 and not symmetric):
        raise ValueError(f"bad header line {lines[0]!r}")
    body = lines[1:]
    if len(body) != n:
        raise ValueError(f"expected {n} mask rows, got {len(body)}")
    rows = []
    for line in body:
        if len(line) != n or set(line) - {"0", "1"}:
            raise ValueError(f"bad mask row {line!r}")
        rows.append(sum(1 << l for l, ch in enumerate(line) if ch == "1"))
    return BipartiteMask(n, tuple(rows), symmetric)


def format_mask_text(G: BipartiteMask) -> str:
    head = f"{G.n} sym" if G.symmetric else f"{G.n}"
    body = ["".join("1" if r >> l & 1 else "0" for l in range(G.n)) for r in G.rows]
    return "\n".join([head, *body]) + "\n"


# matchings


def maximum_matching(G: BipartiteMask) -> Matching:
    if G.n == 0:
        return Matching(0, {})
    indptr, indices = G.csr
    match_l = _matching.hopcroft_karp(indptr, indices, G.n, G.n)
    return Matching(G.n, {j: int(l) for j, l in enumerate(match_l) if l != -1})


def has_perfect_matching(G: BipartiteMask) -> bool:
    return maximum_matching(G).is_perfect


def _check_indices(G: BipartiteMask, A: Iterable[int]) -> list[int]:
    A = list(A)
    for a in A:
        if not 0 <= a < G.n:
            raise IndexError(f"index {a} out of range for n={G.n}")
    return A


def neighborhood(G: BipartiteMask, A: Iterable[int], side: str = "left") -> frozenset[int]:
    """Vertices on the opposite side adjacent to some member of ``A``."""
    A = _check_indices(G, A)
    if side == "left":
        src = G.rows
    elif side == "right":
        src = G.cols
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    acc = 0
    for a in A:
        acc |= src[a]
    return _members(acc)


def tilde_neighborhood(G: BipartiteMask, A: Iterable[int]) -> frozenset[int]:
    """Neighbourhood inside the single identified index set of a symmetric mask."""
    if not G.symmetric:
        raise ValueError("tilde_neighborhood needs a symmetric mask")
    return neighborhood(G, A, "left")


def isolated_points(G: BipartiteMask):
    """Vertices with no incident edge.

    Returns ``(left, right)`` frozensets, or one frozenset of identified
    indices when the mask is symmetric.
    """
    left = frozenset(j for j, r in enumerate(G.rows) if r == 0)
    if G.symmetric:
        return left
    right = frozenset(l for l, c in enumerate(G.cols) if c == 0)
    return left, right


def principal_subgraph(G: BipartiteMask, S: Iterable[int]) -> BipartiteMask:
    """Restrict both sides to ``S`` and relabel its members 0..|S|-1 in increasing order."""
    keep = sorted(set(_check_indices(G, S)))
    rows = []
    for j in keep:
        r = G.rows[j]
        rows.append(sum(1 << new for new, old in enumerate(keep) if r >> old & 1))
    return BipartiteMask(len(keep), tuple(rows), G.symmetric)


def condition_4_1(G: BipartiteMask) -> bool:
    """The distinctness condition: a perfect matching in G, or in ``G[{0..n-1} minus {j}]`` for some j.

    A mask admits values with N distinct eigenvalues exactly when this holds.
    """
    if G.n == 0:
        return True
    indptr, indices = G.csr
    t_indptr, t_indices = G.csr_transpose
    _, ok = _matching.condition_41_kernel(indptr, indices, t_indptr, t_indices, G.n)
    return bool(ok)


# Hall violators and the structural conditions


def _popcount(x: int) -> int:
    return x.bit_count()


def _require_exhaustive(G: BipartiteMask):
    if G.n > EXHAUSTIVE_LIMIT:
        raise ExhaustiveLimitError(f"exhaustive subset search is limited to n <= {EXHAUSTIVE_LIMIT}, got n={G.n}")


def _union(src, subset) -> int:
    acc = 0
    for a in subset:
        acc |= src[a]
    return acc


def _minimum_violator(G: BipartiteMask) -> DeficiencyWitness | None:
    sides = [("index", G.rows)] if G.symmetric else [("left", G.rows), ("right", G.cols)]
    for k in range(1, G.n + 1):
        for side, src in sides:
            for I in combinations(range(G.n), k):
                gamma = _union(src, I)
                if _popcount(gamma) < k:
                    return DeficiencyWitness(side, frozenset(I), _members(gamma))
    return None


def _alternating_violator(G: BipartiteMask, matching: Matching) -> DeficiencyWitness:
    indptr, indices = G.csr
    match_l = np.full(G.n, -1, dtype=np.int64)
    for j, l in matching.pairs.items():
        match_l[j] = l
    match_r = _matching.match_right_from_left(match_l, G.n)
    start = min(j for j in range(G.n) if match_l[j] == -1)
    reach = _matching.reachable_rows(indptr, indices, match_l, match_r, start)
    I = frozenset(int(j) for j in np.flatnonzero(reach))
    side = "index" if G.symmetric else "left"
    return DeficiencyWitness(side, I, neighborhood(G, I, "left"))


def hall_violation_witness(G: BipartiteMask, exhaustive: bool = False) -> DeficiencyWitness | None:
    """A set violating Hall's condition, or None when a perfect matching exists.

    The default builds the violator from alternating paths out of the first
    unmatched row. ``exhaustive=True`` returns a minimum-cardinality violator
    (left side before right, then lexicographic), which is what the
    structural lemmas about minimal violators speak to.
    """
    if exhaustive:
        _require_exhaustive(G)
    m = maximum_matching(G)
    if m.is_perfect:
        return None
    if exhaustive:
        return _minimum_violator(G)
    return _alternating_violator(G, m)


def condition_4_11(G: BipartiteMask) -> ConditionWitness | None:
    """Search for ``I`` (|I| = k, 2 <= k <= (n+1)/2) with ``Gamma(I) = J``, |J| = k-1,
    and every ``w`` in J adjacent to at least two members of I."""
    _require_exhaustive(G)
    n = G.n
    for k in range(2, (n + 1) // 2 + 1):
        for side, src, back in (("left", G.rows, G.cols), ("right", G.cols, G.rows)):
            for I in combinations(range(n), k):
                J = _union(src, I)
                if _popcount(J) != k - 1:
                    continue
                ibits = _bits(I)
                if all(_popcount(back[w] & ibits) >= 2 for w in _members(J)):
                    return ConditionWitness(k, side, frozenset(I), _members(J))
    return None


def condition_5_3(G: BipartiteMask) -> ConditionWitness | None:
    """Symmetric analogue of :func:`condition_4_11` with the extra requirement ``I`` and ``J`` disjoint."""
    if not G.symmetric:
        raise ValueError("condition_5_3 needs a symmetric mask")
    _require_exhaustive(G)
    n = G.n
    for k in range(2, (n + 1) // 2 + 1):
        for I in combinations(range(n), k):
            J = _union(G.rows, I)
            ibits = _bits(I)
            if _popcount(J) != k - 1 or J & ibits:
                continue
            if all(_popcount(G.rows[w] & ibits) >= 2 for w in _members(J)):
                return ConditionWitness(k, "index", frozenset(I), _members(J))
    return None
