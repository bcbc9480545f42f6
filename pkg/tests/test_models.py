import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from degen.bipartite import BipartiteMask, condition_4_1, has_perfect_matching
from degen.models import (
    MaskedMatrixSample,
    Permutation,
    SparseRegime,
    distinct_witness_for_mask,
    eigenvalues,
    eigenvalues_distinct,
    haar_unitary,
    permutation_matrix,
    permutation_model_spectrum,
    repeated_eigenvalue_clusters,
    sample_mask,
    sample_values,
    symmetric_cycle_matrix,
    symmetric_distinct_witness,
    values_on_csr,
    zero_multiplicity,
)
from degen import _matching
from degen import montecarlo as mc


def same_multiset(a, b, tol=1e-9):
    a = sorted(np.asarray(a, dtype=complex), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    b = sorted(np.asarray(b, dtype=complex), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    return len(a) == len(b) and all(abs(x - y) < tol for x, y in zip(a, b))


COUNTEREXAMPLE = BipartiteMask.from_edges(3, [(2, 0), (2, 1), (2, 2), (1, 0)])


class TestPermutationModel:
    def test_cycles(self):
        sigma = Permutation((1, 0, 2))
        assert sigma.cycles == [(0, 1), (2,)]
        assert Permutation.from_cycles(4, [(0, 2, 3)]).images == (2, 1, 3, 0)
        with pytest.raises(ValueError):
            Permutation((0, 0, 1))

    def test_three_cycle_gives_roots_of_unity(self):
        sigma = Permutation.from_cycles(3, [(0, 1, 2)])
        roots = [np.exp(2j * np.pi * k / 3) for k in range(3)]
        assert same_multiset(permutation_model_spectrum(sigma, [1, 1, 1]), roots)

    def test_identity(self):
        assert same_multiset(permutation_model_spectrum(Permutation((0, 1, 2)), [1, 2, 3]), [1, 2, 3])

    def test_transposition_and_fixed_point(self):
        sigma = Permutation.from_cycles(3, [(0, 1)])
        assert same_multiset(permutation_model_spectrum(sigma, [4, 1, 3]), [2, -2, 3])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            permutation_model_spectrum(Permutation((0, 1)), [1.0])

    @given(st.permutations(list(range(8))), st.data())
    def test_agrees_with_eigensolver(self, images, data):
        n = data.draw(st.integers(1, 8))
        images = [i for i in images if i < n]
        sigma = Permutation(tuple(images))
        x = data.draw(st.lists(st.floats(0.1, 3.0), min_size=n, max_size=n))
        spec = permutation_model_spectrum(sigma, x)
        assert same_multiset(spec, np.linalg.eigvals(permutation_matrix(sigma, x)), tol=1e-7)


class TestWitness:
    def test_complete_mask(self):
        w = distinct_witness_for_mask(BipartiteMask.complete(3))
        assert np.array_equal(w.values, np.diag([1.0, 2.0, 3.0]))
        assert same_multiset(eigenvalues(w), [1, 2, 3])

    def test_counterexample_has_none(self):
        assert distinct_witness_for_mask(COUNTEREXAMPLE) is None

    def test_single_entry(self):
        w = distinct_witness_for_mask(BipartiteMask.from_edges(2, [(0, 0)]))
        assert w.values[0, 0] == 1 and w.values[1, 1] == 0
        assert same_multiset(eigenvalues(w), [1, 0])

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_soundness_exhaustive(self, n):
        for code in range(1 << (n * n)):
            G = BipartiteMask.from_bits(n, code)
            w = distinct_witness_for_mask(G)
            assert (w is not None) == condition_4_1(G)
            if w is not None:
                assert eigenvalues_distinct(w) and eigenvalues_distinct(w, mode="exact")

    def test_soundness_n4_sample(self, rng):
        for code in rng.choice(1 << 16, size=3000, replace=False):
            G = BipartiteMask.from_bits(4, int(code))
            w = distinct_witness_for_mask(G)
            assert (w is not None) == condition_4_1(G)
            if w is not None:
                assert eigenvalues_distinct(w)

    def test_dense_masks_always_admit_witness(self):
        # n = 3, at least 5 positions present
        for code in range(1 << 9):
            if bin(code).count("1") >= 5:
                assert distinct_witness_for_mask(BipartiteMask.from_bits(3, code)) is not None


class TestSymmetricWitness:
    def test_complete(self):
        w = symmetric_distinct_witness(BipartiteMask.complete(3, symmetric=True))
        assert np.array_equal(w.values, np.diag([1.0, 2.0, 3.0]))

    def test_open_chain(self):
        eigs = np.linalg.eigvalsh(symmetric_cycle_matrix(3, 0.0))
        np.testing.assert_allclose(eigs, [-math.sqrt(2) / 2, 0.0, math.sqrt(2) / 2], atol=1e-12)
        for n in range(2, 9):
            ref = sorted(math.cos(k * math.pi / (n + 1)) for k in range(1, n + 1))
            np.testing.assert_allclose(np.linalg.eigvalsh(symmetric_cycle_matrix(n)), ref, atol=1e-12)

    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_odd_cycle_determinant(self, n):
        # det P(eps) for an odd closed chain is eps / 2^(n-1)
        for eps in (0.5, 0.25, 0.01):
            P = symmetric_cycle_matrix(n, eps)
            assert np.linalg.det(P) == pytest.approx(eps / 2 ** (n - 1), rel=1e-9)

    def test_small_eps_gives_distinct_nonzero(self):
        eigs = np.linalg.eigvalsh(symmetric_cycle_matrix(3, 0.25))
        assert np.min(np.abs(eigs)) > 1e-3 and np.min(np.diff(eigs)) > 1e-3

    def test_needs_symmetric(self):
        with pytest.raises(ValueError):
            symmetric_distinct_witness(BipartiteMask.complete(2))

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_soundness_exhaustive(self, n):
        pairs = [(j, l) for j in range(n) for l in range(j, n)]
        for code in range(1 << len(pairs)):
            G = BipartiteMask.from_edges(n, [e for b, e in enumerate(pairs) if code >> b & 1], symmetric=True)
            w = symmetric_distinct_witness(G)
            assert (w is not None) == condition_4_1(G)
            if w is not None:
                assert np.array_equal(w.values, w.values.T)
                assert eigenvalues_distinct(w)

    def test_odd_cycle_mask(self):
        G = BipartiteMask.from_edges(3, [(0, 1), (1, 2), (2, 0)], symmetric=True)
        w = symmetric_distinct_witness(G)
        assert eigenvalues_distinct(w)
        assert np.min(np.abs(np.linalg.eigvalsh(w.values))) > 1e-9


class TestSampling:
    def test_full_and_empty_regimes(self, rng):
        assert sample_mask(5, SparseRegime(p_override=1.0), False, rng) == BipartiteMask.complete(5)
        assert sample_mask(5, SparseRegime(p_override=0.0, q=0.0), True, rng) == BipartiteMask.empty(5, True)
        assert sample_mask(4, SparseRegime(p_override=1.0, q=1.0), True, rng) == BipartiteMask.complete(4, True)

    def test_clamped_regime(self):
        r = SparseRegime(c=5.0)
        assert r.p(1) == 1.0 and r.clamped(1)
        assert not SparseRegime(c=0.0).clamped(1000)

    def test_symmetric_samples_are_symmetric(self, rng):
        for _ in range(50):
            G = sample_mask(30, SparseRegime(c=1.0, q=0.3), True, rng)
            a = G.to_array()
            assert np.array_equal(a, a.T)
            s = sample_values(G, "standard_normal", rng)
            assert np.array_equal(s.values, s.values.T)

    def test_n2_perfect_matching_rate(self):
        # exact value 2p^2 - p^4 at p = 1/2; 3 sigma band over 1e5 draws
        rng = np.random.default_rng(5)
        regime = SparseRegime(p_override=0.5)
        trials = 100_000
        hits = sum(has_perfect_matching(sample_mask(2, regime, False, rng)) for _ in range(trials))
        p = 0.4375
        assert abs(hits / trials - p) < 3 * math.sqrt(p * (1 - p) / trials)

    def test_edge_density(self, rng):
        n, p = 400, 0.01
        counts = [sample_mask(n, SparseRegime(p_override=p), False, rng).edge_count for _ in range(30)]
        assert abs(np.mean(counts) - n * n * p) < 4 * math.sqrt(n * n * p / 30)

    def test_values_follow_mask(self, rng):
        G = BipartiteMask.from_edges(4, [(0, 1), (2, 3), (3, 3)])
        s = sample_values(G, "uniform01", rng)
        assert np.all((s.values != 0) == G.to_array())
        assert np.all(s.values[G.to_array()] > 0)
        assert not np.any(sample_values(BipartiteMask.empty(3), "uniform01", rng).values)

    def test_values_deterministic(self):
        G = BipartiteMask.complete(2)
        a = sample_values(G, "uniform01", np.random.default_rng(9)).values
        b = sample_values(G, "uniform01", np.random.default_rng(9)).values
        assert np.array_equal(a, b)

    def test_sample_validation(self):
        with pytest.raises(ValueError):
            MaskedMatrixSample(BipartiteMask.empty(2), np.eye(2))
        with pytest.raises(ValueError):
            MaskedMatrixSample(BipartiteMask.complete(2, True), np.array([[1.0, 2.0], [3.0, 1.0]]))
        s = MaskedMatrixSample(BipartiteMask.complete(2), np.ones((2, 2)))
        with pytest.raises(ValueError):
            s.values[0, 0] = 5.0


class TestDistinctness:
    def test_examples(self):
        assert eigenvalues_distinct(np.diag([1.0, 2.0, 3.0]))
        assert not eigenvalues_distinct(np.zeros((3, 3)))
        assert eigenvalues_distinct(np.zeros((1, 1)))

    def test_counterexample_always_degenerate(self, rng):
        for _ in range(50):
            s = sample_values(COUNTEREXAMPLE, "standard_normal", rng)
            assert not eigenvalues_distinct(s)
            assert not eigenvalues_distinct(s, mode="exact")

    def test_exact_mode(self):
        assert eigenvalues_distinct([[1, 2], [3, 4]], mode="exact")
        assert not eigenvalues_distinct([[1, 1], [0, 1]], mode="exact")
        with pytest.raises(ValueError):
            eigenvalues_distinct(np.eye(2), mode="symbolic")

    def test_structural_zeros_are_exact(self):
        # nilpotent strictly upper triangular part: every eigenvalue is exactly 0
        A = np.triu(np.ones((5, 5)), 1)
        assert np.all(eigenvalues(A) == 0)

    def test_clusters(self):
        clusters = repeated_eigenvalue_clusters(np.array([0.0, 1e-12, 1.0, 2.0, 2.0 + 1e-11]))
        assert sorted(len(c) for c in clusters) == [2, 2]

    def test_repeated_eigenvalues_sit_at_zero(self):
        rng = np.random.default_rng(17)
        found = 0
        for _ in range(3000):
            n = int(rng.integers(2, 7))
            G = BipartiteMask.from_array(rng.random((n, n)) < 0.3)
            s = sample_values(G, "uniform01", rng)
            eigs = eigenvalues(s)
            clusters = repeated_eigenvalue_clusters(eigs)
            if clusters:
                found += 1
                band = 1e-8 * (1 + np.max(np.abs(eigs)))
                assert all(np.all(np.abs(c) < band) for c in clusters)
        assert found > 300


class TestExactScan:
    @pytest.mark.parametrize("symmetric", [False, True])
    def test_all_masks_n3_exact(self, symmetric):
        # exact discriminant of the characteristic polynomial agrees with the graph on every mask
        rng = np.random.default_rng(31)
        n = 3
        pairs = [(j, l) for j in range(n) for l in range(j if symmetric else 0, n)]
        for code in range(1 << len(pairs)):
            a = np.zeros((n, n), dtype=bool)
            for bit, (j, l) in enumerate(pairs):
                if code >> bit & 1:
                    a[j, l] = True
                    a[l, j] |= symmetric
            G = BipartiteMask.from_array(a, symmetric=symmetric)
            s = sample_values(G, "uniform01", rng)
            assert eigenvalues_distinct(s, mode="exact") == condition_4_1(G)


class TestZeroMultiplicity:
    def test_jordan_block_in_dense_basis(self, rng):
        # defective double zero hidden by a dense similarity; rounding splits it to ~1e-8
        for n in (4, 8, 20):
            J = np.zeros((n, n))
            J[0, 1] = 1.0
            J[np.arange(2, n), np.arange(2, n)] = rng.uniform(1, 2, n - 2)
            S = rng.standard_normal((n, n))
            A = S @ J @ np.linalg.inv(S)
            assert zero_multiplicity(A) == 2
            assert not eigenvalues_distinct(A)

    def test_simple_zero(self, rng):
        for n in (3, 10, 40):
            B = rng.standard_normal((n, n))
            B[:, -1] = B[:, :-1] @ rng.standard_normal(n - 1)
            assert zero_multiplicity(B) == 1
            assert eigenvalues_distinct(B)

    def test_rank_two_deficient(self, rng):
        B = rng.standard_normal((6, 4)) @ rng.standard_normal((4, 6))
        assert zero_multiplicity(B) == 2

    def test_nonsingular(self, rng):
        assert zero_multiplicity(rng.standard_normal((7, 7)) + 5 * np.eye(7)) == 0

    def test_sampled_sparse_case(self):
        # a sampled N=20 trial whose only non-trivial block has a defective zero
        seed, trial, n = 3505701067999587963, 12, 20
        p = (np.log(n) + 0.0) / n
        indptr, indices = mc.sample_csr(n, p, 0.0, False, mc.trial_rng(seed, trial, mc.TAG_MASK))
        t_indptr, t_indices = mc._transpose_csr(n, indptr, indices)
        _, ok = _matching.condition_41_kernel(indptr, indices, t_indptr, t_indices, n)
        values = values_on_csr(n, indptr, indices, False, "uniform01", mc.trial_rng(seed, trial, mc.TAG_VALUES))
        assert not ok
        assert not eigenvalues_distinct(values)
        assert not eigenvalues_distinct(values, mode="exact")


class TestHaar:
    def test_one_by_one(self, rng):
        U = haar_unitary(1, rng)
        assert U.shape == (1, 1) and abs(abs(U[0, 0]) - 1) < 1e-14

    @pytest.mark.parametrize("n", range(1, 9))
    def test_unitary(self, n, rng):
        U = haar_unitary(n, rng)
        assert np.max(np.abs(U @ U.conj().T - np.eye(n))) < 1e-12
        assert np.max(np.abs(np.abs(np.linalg.eigvals(U)) - 1)) < 1e-10

    def test_distinct_eigenvalues(self, rng):
        assert all(eigenvalues_distinct(haar_unitary(4, rng)) for _ in range(1000))

    def test_trace_moments(self):
        # Haar moments: E|tr U|^2 = 1, E|tr U^2|^2 = 2 (n >= 2), E|U_ij|^2 = 1/n
        rng = np.random.default_rng(2)
        n, m = 5, 4000
        samples = [haar_unitary(n, rng) for _ in range(m)]
        t1 = np.mean([abs(np.trace(U)) ** 2 for U in samples])
        t2 = np.mean([abs(np.trace(U @ U)) ** 2 for U in samples])
        corner = np.mean([abs(U[0, n - 1]) ** 2 for U in samples])
        assert abs(t1 - 1) < 0.1 and abs(t2 - 2) < 0.2 and abs(corner - 1 / n) < 0.02
