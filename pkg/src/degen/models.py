"""Matrix realizations of masks.

Three kinds of matrices live here:

* constructive witnesses: for a mask satisfying the distinctness condition, explicit
  values supported on a perfect matching whose eigenvalues are all distinct;
* random samples: Bernoulli masks in the sparse regime ``p(N) = (log N + c)/N``
  filled with independent continuous values;
* Haar-random unitaries built from a product of phases and plane rotations.

:func:`eigenvalues_distinct` decides distinctness for a realized matrix.
Because distinctness of a generic fill depends only on the mask, one
continuous draw settles the mask's class with probability one; the Monte
Carlo harness uses that as a cross-check on the graph criterion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph
from scipy.spatial import cKDTree

from .asymptotics import p_of_n
from .bipartite import BipartiteMask, condition_4_1, maximum_matching, principal_subgraph
from .polynomial import characteristic_polynomial, has_multiple_root
from .scalars import to_exact

__all__ = [
    "DEFAULT_DISTINCT_TOL",
    "EigenSolverError",
    "MaskedMatrixSample",
    "Permutation",
    "SparseRegime",
    "distinct_witness_for_mask",
    "eigenvalues",
    "eigenvalues_distinct",
    "format_matrix_text",
    "haar_unitary",
    "p_of_n",
    "permutation_matrix",
    "permutation_model_spectrum",
    "repeated_eigenvalue_clusters",
    "sample_csr",
    "sample_mask",
    "sample_values",
    "symmetric_cycle_matrix",
    "symmetric_distinct_witness",
    "zero_multiplicity",
]

DEFAULT_DISTINCT_TOL = 1e-8

# epsilon search for odd cycles in symmetric witnesses
_EPS_MIN_GAP = 1e-6
_EPS_MIN_ABS = 1e-9
_EPS_MAX_HALVINGS = 60

# zero-multiplicity test: relative singular value cutoff, and the bound on the
# null-vector overlap above which a zero eigenvalue counts as simple
_ZERO_BAND = 1e-4
_RANK_TOL = 1e-12
_SIMPLE_ZERO_FLOOR = 1e-10
_SIMPLE_ZERO_MARGIN = 1e4


class EigenSolverError(RuntimeError):
    def __init__(self, message: str, seed=None):
        super().__init__(message if seed is None else f"{message} (seed={seed})")
        self.seed = seed


@dataclass(frozen=True)
class SparseRegime:
    """Edge probability schedule ``p(N) = (log N + c)/N`` plus the diagonal probability ``q``.

    ``p_override`` pins p regardless of N; it exists for exact small-N checks.
    """

    c: float = 0.0
    q: float = 0.0
    p_override: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if self.p_override is not None and not 0.0 <= self.p_override <= 1.0:
            raise ValueError(f"p_override must lie in [0, 1], got {self.p_override}")

    def p(self, n: int) -> float:
        if self.p_override is not None:
            return float(self.p_override)
        return p_of_n(n, self.c)

    def clamped(self, n: int) -> bool:
        if self.p_override is not None:
            return False
        raw = (math.log(n) + self.c) / n
        return raw < 0.0 or raw > 1.0


@dataclass(frozen=True)
class Permutation:
    """A bijection on {0, ..., N-1} given by its images."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def from_cycles(cls, n: int, cycles: Sequence[Sequence[int]]) -> "Permutation":
        images = list(range(n))
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                images[a] = b
        return cls(tuple(images))

    @property
    def n(self) -> int:
        return len(self.images)

    @property
    def cycles(self) -> list[tuple[int, ...]]:
        """Disjoint cycles ordered by smallest element, each starting there."""
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = []
            k = start
            while not seen[k]:
                seen[k] = True
                cyc.append(k)
                k = self.images[k]
            out.append(tuple(cyc))
        return out


def permutation_matrix(sigma: Permutation, x: Sequence) -> np.ndarray:
    """``sum_j x_j E_{j, sigma(j)}``."""
    if len(x) != sigma.n:
        raise ValueError(f"need {sigma.n} values, got {len(x)}")
    x = np.asarray(x)
    M = np.zeros((sigma.n, sigma.n), dtype=np.result_type(x.dtype, np.float64))
    M[np.arange(sigma.n), sigma.images] = x
    return M


def permutation_model_spectrum(sigma: Permutation, x: Sequence) -> np.ndarray:
    """Eigenvalues of ``sum_j x_j E_{j, sigma(j)}`` without an eigensolver.

    The characteristic polynomial factors over the cycles as
    ``prod (lambda^len - product of x over the cycle)``, so each cycle
    contributes the len-th roots of its product.
    """
    if len(x) != sigma.n:
        raise ValueError(f"need {sigma.n} values, got {len(x)}")
    out = []
    for cyc in sigma.cycles:
        prod = complex(np.prod([complex(x[k]) for k in cyc]))
        length = len(cyc)
        r = abs(prod) ** (1.0 / length)
        phase = np.angle(prod)
        for k in range(length):
            out.append(r * np.exp(1j * (phase + 2 * np.pi * k) / length))
    return np.array(out, dtype=complex)


@dataclass(frozen=True)
class MaskedMatrixSample:
    """A mask together with matrix values vanishing off the mask.

    ``seed`` is carried along for diagnostics only.
    """

    mask: BipartiteMask
    values: np.ndarray
    seed: object = field(default=None, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        n = self.mask.n
        if v.shape != (n, n):
            raise ValueError(f"values shape {v.shape} does not match mask size {n}")
        if n and np.any(v[~self.mask.to_array()] != 0):
            raise ValueError("nonzero value outside the mask")
        if self.mask.symmetric and not np.array_equal(v, v.T):
            raise ValueError("symmetric mask needs symmetric values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


# constructive witnesses


def _witness_permutation(G: BipartiteMask) -> tuple[Permutation, int | None] | None:
    """A permutation supported on G (or on G minus one index), with the removed index."""
    m = maximum_matching(G)
    if m.is_perfect:
        return Permutation(tuple(m.pairs[j] for j in range(G.n))), None
    if m.size < G.n - 1 or not condition_4_1(G):
        return None
    for j in range(G.n):
        keep = [i for i in range(G.n) if i != j]
        sub = maximum_matching(principal_subgraph(G, keep))
        if sub.is_perfect:
            images = list(range(G.n))
            for a, b in sub.pairs.items():
                images[keep[a]] = keep[b]
            return Permutation(tuple(images)), j
    raise AssertionError("the distinctness condition held but no principal subgraph has a perfect matching")


def distinct_witness_for_mask(G: BipartiteMask) -> MaskedMatrixSample | None:
    """Values on the mask with N pairwise distinct eigenvalues, or None if no such values exist.

    The values sit on a perfect matching of G (or of G with one index
    removed, which then contributes a simple zero eigenvalue). Every entry
    on the t-th cycle of the matching permutation equals t, so that cycle's
    eigenvalues are t times the roots of unity of its length: distinct moduli
    across cycles, distinct arguments within one.
    """
    found = _witness_permutation(G)
    if found is None:
        return None
    sigma, removed = found
    values = np.zeros((G.n, G.n))
    t = 0
    for cyc in sigma.cycles:
        if cyc == (removed,):
            continue
        t += 1
        for k in cyc:
            values[k, sigma.images[k]] = float(t)
    sample = MaskedMatrixSample(G, values)
    if not eigenvalues_distinct(sample):
        raise AssertionError(f"witness construction failed for mask\n{G}")
    return sample


def symmetric_cycle_matrix(length: int, eps: float = 0.0) -> np.ndarray:
    """Symmetric matrix of a closed chain: 1/2 between neighbours, eps/2 across the closing pair.

    With eps = 0 this is the path (tridiagonal) matrix whose eigenvalues are
    ``cos(k pi / (length + 1))``.
    """
    P = np.zeros((length, length))
    for i in range(length - 1):
        P[i, i + 1] = P[i + 1, i] = 0.5
    if length >= 3:
        P[0, length - 1] = P[length - 1, 0] = eps / 2
    elif length == 1:
        P[0, 0] = 1.0
    return P


def _min_gap(eigs: np.ndarray) -> float:
    e = np.sort(np.asarray(eigs).real)
    return float(np.min(np.diff(e))) if len(e) > 1 else math.inf


def _odd_cycle_eps(length: int) -> float:
    eps = 1.0
    for _ in range(_EPS_MAX_HALVINGS):
        eps /= 2
        eigs = np.linalg.eigvalsh(symmetric_cycle_matrix(length, eps))
        if _min_gap(eigs) > _EPS_MIN_GAP and np.min(np.abs(eigs)) > _EPS_MIN_ABS:
            return eps
    raise AssertionError(f"no admissible epsilon for an odd cycle of length {length}")


def _cycle_pairs(cyc: tuple[int, ...]) -> list[tuple[int, int, float]]:
    """Unordered pairs of one cycle with their base values (before scaling)."""
    length = len(cyc)
    if length == 1:
        return [(cyc[0], cyc[0], 1.0)]
    if length == 2:
        return [(cyc[0], cyc[1], 1.0)]
    pairs = [(cyc[i], cyc[i + 1], 1.0) for i in range(length - 1)]
    closing = _odd_cycle_eps(length) if length % 2 else 0.0
    pairs.append((cyc[-1], cyc[0], closing))
    return pairs


def _symmetric_values(n: int, cycles, scales) -> np.ndarray:
    values = np.zeros((n, n))
    for cyc, s in zip(cycles, scales):
        for a, b, x in _cycle_pairs(cyc):
            if a == b:
                values[a, a] = s * x
            else:
                values[a, b] = values[b, a] = s * x / 2
    return values


def symmetric_distinct_witness(G: BipartiteMask) -> MaskedMatrixSample | None:
    """Symmetric counterpart of :func:`distinct_witness_for_mask`.

    Each cycle of the matching permutation becomes a chain of symmetric
    entries: fixed points go on the diagonal, 2-cycles give one off-diagonal
    pair, longer cycles use the path values with the closing pair set to 0
    (even length) or a small epsilon (odd length, to lift the zero
    eigenvalue). Cycles are scaled apart so their spectra do not collide;
    the result is checked numerically and rescaled on failure.
    """
    if not G.symmetric:
        raise ValueError("symmetric_distinct_witness needs a symmetric mask")
    found = _witness_permutation(G)
    if found is None:
        return None
    sigma, removed = found
    cycles = [c for c in sigma.cycles if c != (removed,)]
    m = len(cycles)
    attempts = [
        [float(t) for t in range(1, m + 1)],
        [1 + t / 10 for t in range(1, m + 1)],
    ]
    rng = np.random.default_rng(0)
    attempts += [list(rng.uniform(1.0, 2.0, size=m)) for _ in range(20)]
    for scales in attempts:
        values = _symmetric_values(G.n, cycles, scales)
        sample = MaskedMatrixSample(G, values)
        eigs = np.linalg.eigvalsh(values)
        nonzero = np.sort(np.abs(eigs))[1:] if removed is not None else np.abs(eigs)
        if _min_gap(eigs) > _EPS_MIN_GAP and (nonzero.size == 0 or nonzero.min() > _EPS_MIN_ABS):
            return sample
    raise AssertionError(f"symmetric witness construction failed for mask\n{G}")


# sampling


@lru_cache(maxsize=4)
def _upper_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def sample_csr(n: int, p: float, q: float, symmetric: bool, rng: np.random.Generator):
    """Draw a Bernoulli mask and return it as CSR ``(indptr, indices)`` of int64.

    Drawing the edge count from the binomial and then a uniform subset of
    that size gives exactly the i.i.d. Bernoulli law at O(edges) cost.
    """
    if symmetric:
        total = n * (n - 1) // 2
        m = rng.binomial(total, p) if total else 0
        picked = rng.choice(total, size=m, replace=False) if m else np.empty(0, dtype=np.int64)
        iu, ju = _upper_pairs(n)
        a, b = iu[picked], ju[picked]
        loops = np.flatnonzero(rng.random(n) < q)
        rows = np.concatenate([a, b, loops])
        cols = np.concatenate([b, a, loops])
    else:
        total = n * n
        m = rng.binomial(total, p)
        picked = rng.choice(total, size=m, replace=False) if m else np.empty(0, dtype=np.int64)
        rows, cols = np.divmod(picked, n)
    key = np.sort(rows.astype(np.int64) * n + cols)
    rows, cols = np.divmod(key, n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, cols.astype(np.int64)


def sample_mask(n: int, regime: SparseRegime, symmetric: bool, rng: np.random.Generator) -> BipartiteMask:
    """Asymmetric: each of the n^2 bits is 1 with probability p(n).
    Symmetric: each pair j < l drawn once with p(n) and mirrored; diagonal bits with q."""
    if n < 1:
        raise ValueError("n must be >= 1")
    indptr, indices = sample_csr(n, regime.p(n), regime.q, symmetric, rng)
    return BipartiteMask.from_csr(n, indptr, indices, symmetric)


def _draw(dist: str, size: int, rng: np.random.Generator) -> np.ndarray:
    if dist == "uniform01":
        return 1.0 - rng.random(size)  # (0, 1]: never an exact zero on the mask
    if dist == "standard_normal":
        return rng.standard_normal(size)
    raise ValueError(f"unknown distribution {dist!r}")


def values_on_csr(n: int, indptr, indices, symmetric: bool, dist: str, rng: np.random.Generator) -> np.ndarray:
    rows = np.repeat(np.arange(n), np.diff(indptr))
    values = np.zeros((n, n))
    if symmetric:
        upper = rows <= indices
        r, c = rows[upper], indices[upper]
        x = _draw(dist, r.size, rng)
        values[r, c] = x
        values[c, r] = x
    else:
        values[rows, indices] = _draw(dist, rows.size, rng)
    return values


def sample_values(mask: BipartiteMask, dist: str, rng: np.random.Generator) -> MaskedMatrixSample:
    """Independent continuous draws on the mask, zeros elsewhere; one draw per unordered pair if symmetric."""
    indptr, indices = mask.csr
    values = values_on_csr(mask.n, indptr, indices, mask.symmetric, dist, rng)
    return MaskedMatrixSample(mask, values)


# distinctness


def _as_matrix(M) -> np.ndarray:
    return np.asarray(M.values if isinstance(M, MaskedMatrixSample) else M)


def _diagonal_blocks(A: np.ndarray) -> tuple[bool, list[np.ndarray]]:
    """Index sets of the diagonal blocks of the block-triangular form (strong components)."""
    symmetric = np.array_equal(A, A.T) and not np.iscomplexobj(A)
    _, labels = scipy.sparse.csgraph.connected_components(
        scipy.sparse.csr_matrix(A != 0), directed=not symmetric, connection="strong"
    )
    order = np.argsort(labels, kind="stable")
    bounds = np.flatnonzero(np.diff(labels[order])) + 1
    return symmetric, np.split(order, bounds)


def _block_eigenvalues(A: np.ndarray, symmetric: bool, blocks, seed=None) -> list[np.ndarray]:
    out = []
    try:
        for idx in blocks:
            if idx.size == 1:
                out.append(np.array([A[idx[0], idx[0]]], dtype=complex))
            else:
                block = A[np.ix_(idx, idx)]
                eigs = np.linalg.eigvalsh(block) if symmetric else np.linalg.eigvals(block)
                out.append(np.asarray(eigs, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}", seed=seed) from exc
    return out


def eigenvalues(M, seed=None) -> np.ndarray:
    """Eigenvalues via the block-triangular form given by strongly connected components.

    Permuting a matrix to block triangular form leaves the spectrum equal to
    the union of the diagonal blocks' spectra. Singleton blocks contribute
    their diagonal entry exactly, so structurally forced zeros come out as
    exact zeros rather than as a rounding-split cluster.
    """
    A = _as_matrix(M)
    if A.shape[0] == 0:
        return np.empty(0, dtype=complex)
    symmetric, blocks = _diagonal_blocks(A)
    return np.concatenate(_block_eigenvalues(A, symmetric, blocks, seed))


def repeated_eigenvalue_clusters(eigs: np.ndarray, tol: float = DEFAULT_DISTINCT_TOL) -> list[np.ndarray]:
    """Groups of eigenvalues closer than ``tol * (1 + max|eig|)``, transitively joined."""
    eigs = np.asarray(eigs, dtype=complex)
    if eigs.size < 2:
        return []
    thr = tol * (1.0 + float(np.max(np.abs(eigs))))
    pts = np.column_stack([eigs.real, eigs.imag])
    pairs = cKDTree(pts).query_pairs(thr, output_type="ndarray")
    if len(pairs) == 0:
        return []
    graph = scipy.sparse.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(eigs.size, eigs.size))
    _, labels = scipy.sparse.csgraph.connected_components(graph, directed=False)
    counts = np.bincount(labels)
    return [eigs[labels == lab] for lab in np.flatnonzero(counts > 1)]


def zero_multiplicity(block: np.ndarray) -> int:
    """Algebraic multiplicity of the eigenvalue 0 of a dense block, capped at 2.

    A defective zero splits under rounding into a cluster of radius about
    sqrt(eps), which no fixed gap tolerance separates from a genuine close
    pair. The multiplicity is read off the SVD instead: a numerical null
    space of dimension >= 2 means a repeated zero; with a one-dimensional
    null space the zero is simple iff the left and right null vectors are
    not orthogonal (orthogonal means a Jordan chain).
    """
    U, s, Vh = np.linalg.svd(block)
    if s[0] == 0:
        return min(2, block.shape[0])
    rel = s / s[0]
    null = int(np.count_nonzero(rel <= _RANK_TOL))
    if null != 1:
        return min(null, 2)
    overlap = abs(np.vdot(U[:, -1], Vh[-1].conj()))
    rounding = np.finfo(float).eps / rel[-2] if block.shape[0] > 1 else 0.0
    return 1 if overlap > max(_SIMPLE_ZERO_FLOOR, _SIMPLE_ZERO_MARGIN * rounding) else 2


def eigenvalues_distinct(M, mode: str = "numeric", tol: float = DEFAULT_DISTINCT_TOL) -> bool:
    """Whether the matrix has pairwise distinct eigenvalues.

    ``numeric``: every pairwise gap exceeds ``tol * (1 + max|eig|)``; when
    two or more eigenvalues sit near 0 the multiplicity of 0 is settled per
    block by :func:`zero_multiplicity` first. ``exact``: the exact
    characteristic polynomial has nonzero discriminant; float entries are
    taken at their exact binary value.
    """
    A = _as_matrix(M)
    if mode == "exact":
        rows = [[to_exact(x) for x in r] for r in A.tolist()]
        return not has_multiple_root(characteristic_polynomial(rows, exact=True))
    if mode != "numeric":
        raise ValueError(f"mode must be 'numeric' or 'exact', got {mode!r}")
    if A.shape[0] < 2:
        return True
    seed = M.seed if isinstance(M, MaskedMatrixSample) else None
    symmetric, blocks = _diagonal_blocks(A)
    parts = _block_eigenvalues(A, symmetric, blocks, seed)
    eigs = np.concatenate(parts)
    scale = 1.0 + float(np.max(np.abs(eigs)))
    band = _ZERO_BAND * scale
    if np.count_nonzero(np.abs(eigs) <= band) >= 2:
        zeros = 0
        # exact singleton zeros first; they are free
        order = sorted(range(len(blocks)), key=lambda b: blocks[b].size)
        for b in order:
            vals = parts[b]
            if not np.any(np.abs(vals) <= band):
                continue
            if blocks[b].size == 1:
                k = int(vals[0] == 0)
            else:
                k = zero_multiplicity(A[np.ix_(blocks[b], blocks[b])])
            zeros += k
            if zeros >= 2:
                return False
            if k:
                parts[b] = np.delete(vals, np.argmin(np.abs(vals)))
        eigs = np.concatenate(parts)
    return not repeated_eigenvalue_clusters(eigs, tol) if eigs.size else True


# Haar unitaries


def _rotation_angle(gap: int, u: float) -> float:
    # inverse CDF of 2k sin x cos^(2k-1) x on [0, pi/2]: F(x) = 1 - cos^(2k) x
    return math.acos(u ** (1.0 / (2 * gap)))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary as an ordered product of phases and rotations.

    For each pair j < l (j outer, l inner) the factor ``diag phase on l`` is
    followed by a real rotation in the (j, l) plane; a final diagonal of
    phases closes the product. Phase angles are uniform on [0, 2 pi];
    rotation angles have density ``2(l-j) sin x cos^(2(l-j)-1) x``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    U = np.eye(n, dtype=complex)
    for j in range(n - 1):
        for l in range(j + 1, n):
            U[:, l] *= np.exp(1j * rng.uniform(0.0, 2 * np.pi))
            theta = _rotation_angle(l - j, 1.0 - rng.random())
            cj, cl = U[:, j].copy(), U[:, l].copy()
            c, s = math.cos(theta), math.sin(theta)
            U[:, j] = c * cj - s * cl
            U[:, l] = s * cj + c * cl
    U *= np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=n))[None, :]
    return U


def format_matrix_text(values: np.ndarray) -> str:
    """``n`` on the first line, then n whitespace-separated rows (repr precision)."""
    A = np.asarray(values)
    lines = [str(A.shape[0])]
    lines += [" ".join(repr(complex(x)) if np.iscomplexobj(A) else repr(float(x)) for x in row) for row in A]
    return "\n".join(lines) + "\n"
