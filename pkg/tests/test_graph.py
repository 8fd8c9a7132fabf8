import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import constrained_lsq, knn_loop
from tmrlp.data import synth_blobs
from tmrlp.exceptions import TooFewPoints, ValidationError
from tmrlp.graph import (baseline_graph, knn, laplacian, lle_weights, local_weights,
                         symmetrize)


class TestKnn:
    def test_collinear_tie_goes_to_smaller_index(self):
        X = np.array([[0.0, 1.0, 2.0]])
        np.testing.assert_array_equal(knn(X, 1), [[1], [0], [1]])

    def test_duplicates_pick_each_other(self):
        X = np.array([[0.0, 5.0, 0.0, 5.0], [1.0, 1.0, 1.0, 1.0]])
        np.testing.assert_array_equal(knn(X, 1)[:, 0], [2, 3, 0, 1])

    def test_matches_exhaustive_sort(self, rng):
        X = rng.standard_normal((3, 20))
        np.testing.assert_array_equal(knn(X, 7), knn_loop(X, 7))

    def test_never_self(self, rng):
        X = rng.standard_normal((2, 15))
        nb = knn(X, 5)
        assert not np.any(nb == np.arange(15)[:, None])

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            knn(np.zeros((2, 3)), 3)

    def test_bad_k(self):
        with pytest.raises(ValidationError):
            knn(np.zeros((2, 3)), 0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_permutation_equivariance(self, seed):
        r = np.random.default_rng(seed)
        X = r.standard_normal((3, 12))
        perm = r.permutation(12)
        inv = np.argsort(perm)
        # continuous data: no ties, so relabelled neighbours must agree
        np.testing.assert_array_equal(knn(X[:, perm], 4), inv[knn(X, 4)[perm]])


class TestLocalWeights:
    def test_midpoint(self):
        w = local_weights(np.array([1.0, 1.0]), np.array([[0.0, 2.0], [0.0, 2.0]]))
        np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-14)

    def test_coincident_neighbour(self):
        x = np.array([1.0, 2.0, 3.0])
        nb = np.stack([x, x + np.array([1.0, -1.0, 0.5])], axis=1)
        w = local_weights(x, nb, reg=1e-10)
        np.testing.assert_allclose(w, [1.0, 0.0], atol=1e-9)

    def test_residual_matches_constrained_lsq(self, rng):
        X = rng.standard_normal((2, 12))
        nbrs = knn(X, 3)
        for j in range(12):
            nb = X[:, nbrs[j]]
            ours = np.linalg.norm(X[:, j] - nb @ local_weights(X[:, j], nb, reg=1e-12))
            ref = np.linalg.norm(X[:, j] - nb @ constrained_lsq(X[:, j], nb))
            assert abs(ours - ref) <= 1e-8

    def test_weights_match_constrained_lsq_when_well_posed(self, rng):
        X = rng.standard_normal((6, 10))
        nb = X[:, 1:4]
        np.testing.assert_allclose(local_weights(X[:, 0], nb, reg=0.0),
                                   constrained_lsq(X[:, 0], nb), rtol=1e-9, atol=1e-12)

    def test_negative_reg(self):
        with pytest.raises(ValidationError):
            local_weights(np.zeros(2), np.ones((2, 2)), reg=-1.0)


class TestLleWeights:
    def test_columns_sum_to_one_and_zero_diagonal(self):
        ds = synth_blobs(seed=3)
        W = lle_weights(ds.X, knn(ds.X, 7))
        np.testing.assert_allclose(W.sum(axis=0), 1.0, atol=1e-10)
        assert np.all(np.diag(W) == 0.0)
        assert np.all((W != 0).sum(axis=0) <= 7)

    def test_support_is_neighbourhood(self, rng):
        X = rng.standard_normal((4, 15))
        nb = knn(X, 5)
        W = lle_weights(X, nb)
        for j in range(15):
            off = np.setdiff1d(np.arange(15), nb[j])
            assert np.all(W[off, j] == 0.0)

    def test_length_mismatch(self, rng):
        with pytest.raises(ValidationError):
            lle_weights(rng.standard_normal((2, 5)), np.zeros((4, 2), dtype=int))


class TestSymmetrize:
    def test_symmetric_input(self, rng):
        B = rng.random((4, 4))
        S = B + B.T
        out = symmetrize(S)
        expected = S.copy()
        np.fill_diagonal(expected, 0.0)
        np.testing.assert_array_equal(out, expected)

    def test_two_by_two(self):
        np.testing.assert_array_equal(symmetrize(np.array([[0.0, 1.0], [0.0, 0.0]])),
                                      [[0.0, 0.5], [0.5, 0.0]])

    def test_random_is_symmetric(self, rng):
        S = symmetrize(rng.standard_normal((6, 6)))
        assert np.array_equal(S, S.T)

    def test_non_square(self):
        with pytest.raises(ValidationError):
            symmetrize(np.ones((2, 3)))


class TestLaplacian:
    W2 = np.array([[0.0, 1.0], [1.0, 0.0]])

    def test_unnormalized(self):
        np.testing.assert_array_equal(laplacian(self.W2), [[1.0, -1.0], [-1.0, 1.0]])

    def test_normalized_unit_degrees(self):
        np.testing.assert_allclose(laplacian(self.W2, normalized=True),
                                   [[1.0, -1.0], [-1.0, 1.0]])

    def test_rows_sum_to_zero(self, rng):
        B = rng.random((7, 7))
        L = laplacian(symmetrize(B))
        np.testing.assert_allclose(L.sum(axis=1), 0.0, atol=1e-12)

    def test_isolated_node_identity_row(self):
        W = np.zeros((3, 3))
        W[0, 1] = W[1, 0] = 2.0
        L = laplacian(W, normalized=True)
        np.testing.assert_array_equal(L[2], [0.0, 0.0, 1.0])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 10), st.integers(0, 2 ** 32 - 1))
    def test_psd(self, N, seed):
        r = np.random.default_rng(seed)
        L = laplacian(symmetrize(r.random((N, N))))
        x = r.standard_normal(N)
        assert x @ L @ x >= -1e-10


def test_baseline_graph_is_valid(rng):
    X = rng.standard_normal((5, 30))
    W = baseline_graph(X, K=5)
    assert np.array_equal(W, W.T)
    assert W.min() >= 0.0
    assert np.all(np.diag(W) == 0.0)
