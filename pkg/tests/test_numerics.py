import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_spd
from oracles import col_weights_loop, l21_loop
from tmrlp.exceptions import SingularSystem, ValidationError
from tmrlp.numerics import (DEFAULT_TAU, fd_gradient, frobenius_norm, l21_norm, reweight_diag,
                            solve_right, solve_spd)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
matrices = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.float64, s, elements=finite))


class TestNorms:
    def test_l21_single_row(self):
        assert l21_norm(np.array([[3.0, 4.0], [0.0, 0.0]])) == 5.0

    def test_l21_identity(self):
        assert l21_norm(np.eye(2)) == 2.0

    def test_l21_matches_loop(self, rng):
        M = rng.standard_normal((3, 3))
        assert l21_norm(M) == pytest.approx(l21_loop(M), rel=1e-14)

    def test_l21_empty_rejected(self):
        with pytest.raises(ValidationError):
            l21_norm(np.zeros((0, 3)))

    def test_frobenius(self, rng):
        assert frobenius_norm(np.zeros((3, 3))) == 0.0
        assert frobenius_norm(np.eye(3)) == pytest.approx(np.sqrt(3))
        M = rng.standard_normal((4, 2))
        assert frobenius_norm(M) == pytest.approx(np.sqrt(np.trace(M.T @ M)), rel=1e-14)

    @given(matrices)
    def test_norm_inequalities(self, M):
        fro = frobenius_norm(M)
        l21 = l21_norm(M)
        slack = 1e-9 * (1 + fro)
        assert fro - slack <= l21 <= np.sqrt(M.shape[0]) * fro + slack


class TestReweight:
    def test_zero_matrix(self):
        np.testing.assert_array_equal(reweight_diag(np.zeros((3, 4)), "cols", 1e-8),
                                      np.full(4, 1e8))

    def test_row_3_4_5(self):
        w = reweight_diag(np.array([[3.0, 4.0]]), "rows", 1e-14)
        assert w[0] == pytest.approx(0.1, rel=1e-12)

    def test_columns_match_loop(self, rng):
        E = rng.standard_normal((4, 5))
        np.testing.assert_allclose(reweight_diag(E, "cols", DEFAULT_TAU),
                                   col_weights_loop(E, DEFAULT_TAU), rtol=1e-14)

    def test_rows_are_columns_of_transpose(self, rng):
        E = rng.standard_normal((4, 5))
        np.testing.assert_array_equal(reweight_diag(E, "rows"), reweight_diag(E.T, "cols"))

    def test_bad_tau(self):
        with pytest.raises(ValidationError):
            reweight_diag(np.ones((2, 2)), "cols", 0.0)

    def test_bad_axis(self):
        with pytest.raises(ValidationError):
            reweight_diag(np.ones((2, 2)), "diag")

    @given(arrays(np.float64, (3, 4), elements=st.floats(-10, 10)).filter(
        lambda E: np.all(np.linalg.norm(E, axis=0) >= 1)))
    def test_scale_covariance(self, E):
        w1 = reweight_diag(E, "cols", 1e-14)
        w2 = reweight_diag(2 * E, "cols", 1e-14)
        np.testing.assert_allclose(w2, w1 / 2, rtol=1e-12)


class TestSolve:
    def test_b_equals_s(self, rng):
        S = random_spd(rng, 5)
        np.testing.assert_allclose(solve_right(S, S), np.eye(5), atol=1e-10)

    def test_scaled_identity(self, rng):
        B = rng.standard_normal((3, 4))
        np.testing.assert_allclose(solve_right(B, 2 * np.eye(4)), B / 2, rtol=1e-15)

    def test_residual(self, rng):
        S = random_spd(rng, 5)
        B = rng.standard_normal((3, 5))
        X = solve_right(B, S)
        assert np.linalg.norm(X @ S - B) <= 1e-10 * np.linalg.norm(B)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValidationError):
            solve_spd(np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones(2))

    def test_nonsquare_rejected(self):
        with pytest.raises(ValidationError):
            solve_spd(np.ones((2, 3)), np.ones(2))

    def test_zero_matrix_is_singular(self):
        with pytest.raises(SingularSystem):
            solve_spd(np.zeros((3, 3)), np.ones(3))

    def test_indefinite_is_singular(self):
        with pytest.raises(SingularSystem):
            solve_spd(np.diag([1.0, -1.0]), np.ones(2))

    def test_ridge_retry_on_rank_deficient_psd(self):
        # rank-deficient PSD with a consistent right-hand side
        v = np.ones((4, 1)) / 2
        S = np.eye(4) - v @ v.T
        B = S @ np.arange(4.0)
        X = solve_spd(S, B)
        assert np.linalg.norm(S @ X - B) <= 1e-6 * np.linalg.norm(B)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
    def test_round_trip(self, m, k, seed):
        r = np.random.default_rng(seed)
        S = random_spd(r, m, shift=m)
        X = r.standard_normal((k, m))
        np.testing.assert_allclose(solve_right(X @ S, S), X, rtol=1e-9, atol=1e-9)


class TestFdGradient:
    def test_squared_frobenius(self, rng):
        M = rng.standard_normal((3, 4))
        np.testing.assert_allclose(fd_gradient(lambda Z: np.sum(Z ** 2), M), 2 * M, atol=1e-8)

    def test_trace(self, rng):
        M = rng.standard_normal((3, 3))
        np.testing.assert_allclose(fd_gradient(np.trace, M), np.eye(3), atol=1e-8)

    def test_nonpositive_step(self):
        with pytest.raises(ValidationError):
            fd_gradient(np.sum, np.ones((2, 2)), h=0.0)
