import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import argmax_loop, harmonic_solve
from tmrlp.baselines import ABSTAIN, general_lp, gfhf, llgc, predict_labels
from tmrlp.exceptions import SingularSystem, ValidationError
from tmrlp.graph import laplacian, symmetrize


def chain(N):
    W = np.zeros((N, N))
    for i in range(N - 1):
        W[i, i + 1] = W[i + 1, i] = 1.0
    return W


def random_instance(r, N=10, c=3, n_lab=4):
    W = symmetrize(r.random((N, N)))
    lab = r.choice(N, n_lab, replace=False)
    Y = np.zeros((c, N))
    Y[r.integers(0, c, n_lab), lab] = 1.0
    U = np.zeros(N)
    U[lab] = r.uniform(0.5, 2.0, n_lab)
    return W, Y, U, lab


class TestGeneralLp:
    def test_empty_graph_returns_y(self, rng):
        Y = np.eye(3)[:, [0, 1, 2, 0]]
        F = general_lp(np.zeros((4, 4)), Y, rng.uniform(0.5, 2, 4))
        np.testing.assert_allclose(F, Y, rtol=1e-12)

    def test_two_nodes(self):
        W = np.array([[0.0, 1.0], [1.0, 0.0]])
        Y = np.array([[1.0, 0.0], [0.0, 0.0]])
        F = general_lp(W, Y, np.array([1.0, 0.0]))
        # (L + U) = [[2,-1],[-1,1]]; F = Y U (L+U)^-1 = [1, 1] in row 0
        np.testing.assert_allclose(F, [[1.0, 1.0], [0.0, 0.0]], atol=1e-12)
        assert list(predict_labels(F)) == [0, 0]

    def test_large_clamp_matches_harmonic(self):
        W = chain(4)
        Y = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])
        U = np.array([1e8, 0, 0, 1e8])
        F = general_lp(W, Y, U)
        ref = harmonic_solve(W, Y, [0, 3])
        np.testing.assert_allclose(F, ref, atol=1e-6)
        assert F[0, 0] > F[0, 1] > F[0, 2] > F[0, 3]

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.booleans())
    def test_stationarity_residual(self, seed, normalized):
        W, Y, U, _ = random_instance(np.random.default_rng(seed))
        F = general_lp(W, Y, U, normalized=normalized)
        L = laplacian(W, normalized=normalized)
        YU = Y * U
        assert np.linalg.norm(F @ (L + np.diag(U)) - YU) <= 1e-8 * np.linalg.norm(YU)

    def test_zero_fitness_is_singular(self):
        with pytest.raises(SingularSystem):
            general_lp(chain(3), np.zeros((2, 3)), np.zeros(3))

    def test_negative_graph_rejected(self):
        W = chain(3)
        W[0, 1] = W[1, 0] = -1.0
        with pytest.raises(ValidationError):
            general_lp(W, np.zeros((2, 3)), np.ones(3))

    def test_asymmetric_graph_rejected(self):
        W = chain(3)
        W[0, 2] = 1.0
        with pytest.raises(ValidationError):
            general_lp(W, np.zeros((2, 3)), np.ones(3))

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            general_lp(chain(3), np.zeros((2, 4)), np.ones(3))


class TestGfhf:
    def test_isolated_labeled_point_keeps_label(self):
        W = chain(4)
        W[3, 2] = W[2, 3] = 0.0
        Y = np.zeros((2, 4))
        Y[0, 0] = Y[1, 3] = 1.0
        F = gfhf(W, Y, [0, 3])
        np.testing.assert_array_equal(F[:, 3], [0.0, 1.0])

    def test_chain_matches_harmonic_solution(self):
        W = chain(4)
        Y = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])
        F = gfhf(W, Y, [0, 3])
        np.testing.assert_allclose(F, [[1, 2 / 3, 1 / 3, 0], [0, 1 / 3, 2 / 3, 1]], atol=1e-6)

    def test_disconnected_component_abstains(self):
        W = np.zeros((5, 5))
        W[0, 1] = W[1, 0] = 1.0
        W[2, 3] = W[3, 2] = W[3, 4] = W[4, 3] = 1.0
        Y = np.zeros((2, 5))
        Y[0, 0] = 1.0
        F = gfhf(W, Y, [0])
        assert np.all(F[:, 2:] == 0.0)
        np.testing.assert_array_equal(predict_labels(F), [0, 0, ABSTAIN, ABSTAIN, ABSTAIN])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_bounds_on_connected_graph(self, seed):
        r = np.random.default_rng(seed)
        W, Y, _, lab = random_instance(r)
        F = gfhf(W, Y, lab)
        assert F.min() >= -1e-9 and F.max() <= 1 + 1e-9
        unl = np.setdiff1d(np.arange(W.shape[0]), lab)
        assert np.all(F[:, unl].sum(axis=0) <= 1 + 1e-6)

    def test_matches_brute_force_on_random_graph(self, rng):
        W, Y, _, lab = random_instance(rng, N=12)
        np.testing.assert_allclose(gfhf(W, Y, lab), harmonic_solve(W, Y, lab), atol=1e-6)


class TestLlgc:
    def test_large_mu_returns_y(self, rng):
        W, Y, _, _ = random_instance(rng)
        np.testing.assert_allclose(llgc(W, Y, mu=1e10), Y, atol=1e-8)

    def test_two_nodes_mu_one(self):
        W = np.array([[0.0, 1.0], [1.0, 0.0]])
        Y = np.array([[1.0, 0.0], [0.0, 0.0]])
        L = np.eye(2) - W  # unit degrees
        ref = Y @ np.linalg.inv(L + np.eye(2))
        np.testing.assert_allclose(llgc(W, Y, mu=1.0), ref, atol=1e-12)

    def test_class_permutation_equivariance(self, rng):
        W, Y, _, _ = random_instance(rng)
        perm = [2, 0, 1]
        np.testing.assert_allclose(llgc(W, Y[perm]), llgc(W, Y)[perm], atol=1e-12)

    def test_mu_must_be_positive(self):
        with pytest.raises(ValidationError):
            llgc(chain(3), np.zeros((2, 3)), mu=0.0)


class TestPredictLabels:
    def test_one_hot(self):
        Y = np.eye(3)[:, [2, 0, 1, 1]]
        np.testing.assert_array_equal(predict_labels(Y), [2, 0, 1, 1])

    def test_tie_goes_to_smaller_class(self):
        assert predict_labels(np.array([[0.2], [0.2]]))[0] == 0

    def test_matches_loop(self, rng):
        F = rng.standard_normal((4, 30))
        F[:, 5] = 0.0
        np.testing.assert_array_equal(predict_labels(F), argmax_loop(F))

    @given(st.integers(0, 2 ** 32 - 1), st.floats(1e-3, 1e3))
    def test_positive_scaling_invariance(self, seed, s):
        F = np.random.default_rng(seed).standard_normal((3, 8))
        np.testing.assert_array_equal(predict_labels(s * F), predict_labels(F))
