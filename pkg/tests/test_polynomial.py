import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hofj import (
    DenseSizeError,
    OpinionState,
    PolynomialSpec,
    WeightedGraph,
    build_polynomial_laplacian,
    build_transition_polynomial,
    generate_resistance,
    mean_absolute_error,
    solve_equilibrium_exact,
)
from hofj.harness import TREE_CASES, tree_state

from conftest import nx_transition, random_connected_graph


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    return OpinionState(rng.random(n), generate_resistance(n, seed))


class TestPolynomialSpec:
    def test_valid(self):
        assert PolynomialSpec((0.5, 0.5)).T == 2
        assert PolynomialSpec.parse("0.2, 0.3,0.5").beta == (0.2, 0.3, 0.5)

    @pytest.mark.parametrize("beta", [(), (0.5, 0.6), (1.2, -0.2)])
    def test_invalid(self, beta):
        with pytest.raises(ValueError):
            PolynomialSpec(beta)


class TestOpinionState:
    def test_x_starts_at_s(self):
        st_ = OpinionState([0.2, 0.8], [0.5, 1.0])
        np.testing.assert_array_equal(st_.x, st_.s)

    @pytest.mark.parametrize("s, a", [([1.2], [0.5]), ([0.5], [0.0]), ([0.5], [1.5]), ([0.1, 0.2], [0.5])])
    def test_rejects_out_of_range(self, s, a):
        with pytest.raises(ValueError):
            OpinionState(s, a)


class TestTransitionPolynomial:
    def test_degree_one_is_P(self):
        g = random_connected_graph(30, 0.2, seed=0, weighted=True)
        P = build_transition_polynomial(g, PolynomialSpec((1.0,))).matrix
        np.testing.assert_array_equal(P, g.transition().toarray())

    def test_triangle_square(self, triangle):
        P2 = build_transition_polynomial(triangle, PolynomialSpec((0.0, 1.0))).matrix
        expect = np.full((3, 3), 0.25) + np.eye(3) * 0.25
        np.testing.assert_allclose(P2, expect, atol=1e-15)

    def test_matches_independent_powers(self):
        g = random_connected_graph(25, 0.25, seed=2, weighted=True)
        beta = (0.2, 0.0, 0.5, 0.3)
        P = nx_transition(g)
        expect = sum(b * np.linalg.matrix_power(P, r) for r, b in enumerate(beta, start=1))
        got = build_transition_polynomial(g, PolynomialSpec(beta))
        np.testing.assert_allclose(got.matrix, expect, atol=1e-12)
        got.check()

    def test_dense_cap(self):
        g = random_connected_graph(30, 0.2, seed=0)
        with pytest.raises(DenseSizeError, match="sparsifier"):
            build_transition_polynomial(g, PolynomialSpec((1.0,)), max_nodes=10)


class TestPolynomialLaplacian:
    def test_degree_one_is_classic_laplacian(self):
        g = random_connected_graph(30, 0.2, seed=1, weighted=True)
        L = build_polynomial_laplacian(g, PolynomialSpec((1.0,))).matrix
        np.testing.assert_allclose(L, g.laplacian().toarray(), atol=1e-12)

    def test_path_of_three_second_order(self):
        g = WeightedGraph.from_edges(3, [0, 1], [1, 2])
        # D = diag(1,2,1); D P^2 = [[.5,0,.5],[0,2,0],[.5,0,.5]]
        expect = np.array([[0.5, 0, -0.5], [0, 0, 0], [-0.5, 0, 0.5]])
        L = build_polynomial_laplacian(g, PolynomialSpec((0.0, 1.0))).matrix
        np.testing.assert_allclose(L, expect, atol=1e-15)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(5, 100), st.lists(st.floats(0, 1), min_size=1, max_size=5), st.integers(0, 10**6))
    def test_laplacian_invariants(self, n, raw, seed):
        if sum(raw) <= 0:
            return
        beta = tuple(b / sum(raw) for b in raw)
        spec = PolynomialSpec(beta)
        g = random_connected_graph(n, min(1.0, 4.0 / n), seed=seed, weighted=seed % 2 == 0)
        L = build_polynomial_laplacian(g, spec)
        L.check(tol=1e-9)
        np.testing.assert_allclose(L.matrix @ np.ones(n), 0, atol=1e-9)


class TestExactSolver:
    @pytest.mark.parametrize("name", list(TREE_CASES))
    def test_tree_reference_values(self, tree, name):
        beta, (red, yellow, blue), _ = TREE_CASES[name]
        z = solve_equilibrium_exact(tree, PolynomialSpec(beta), tree_state())
        assert z[0] == pytest.approx(red, abs=1e-3)
        np.testing.assert_allclose(z[1:4], yellow, atol=1e-3)
        np.testing.assert_allclose(z[4:], blue, atol=1e-3)

    def test_fully_stubborn_returns_innate(self):
        g = random_connected_graph(40, 0.2, seed=9)
        s = np.random.default_rng(1).random(40)
        z = solve_equilibrium_exact(g, PolynomialSpec((0.3, 0.7)), OpinionState(s, np.ones(40)))
        np.testing.assert_allclose(z, s, atol=1e-12)

    def test_matches_long_fixed_point_iteration(self):
        g = random_connected_graph(50, 0.15, seed=4, weighted=True)
        spec = PolynomialSpec((0.5, 0.5))
        state = random_state(50, 4)
        P = nx_transition(g)
        Pstar = 0.5 * P + 0.5 * P @ P
        x = state.s.copy()
        for _ in range(1000):
            x = state.alpha * state.s + (1 - state.alpha) * (Pstar @ x)
        z = solve_equilibrium_exact(g, spec, state)
        assert np.abs(z - x).max() <= 1e-8

    def test_residual_and_bounds(self):
        g = random_connected_graph(80, 0.1, seed=6, weighted=True)
        spec = PolynomialSpec((0.2, 0.3, 0.5))
        state = random_state(80, 6)
        Pstar = build_transition_polynomial(g, spec)
        z = solve_equilibrium_exact(g, spec, state, transition=Pstar)
        M = np.eye(80) - (1 - state.alpha)[:, None] * Pstar.matrix
        assert np.abs(M @ z - state.alpha * state.s).max() <= 1e-9
        assert z.min() >= -1e-12 and z.max() <= 1 + 1e-12

    def test_classic_reduction(self):
        g = random_connected_graph(60, 0.1, seed=8, weighted=True)
        state = random_state(60, 8)
        P = nx_transition(g)
        z_fj = np.linalg.inv(np.eye(60) - (1 - state.alpha)[:, None] * P) @ (state.alpha * state.s)
        z = solve_equilibrium_exact(g, PolynomialSpec((1.0,)), state)
        assert np.abs(z - z_fj).max() <= 1e-9

    def test_length_mismatch(self, tree):
        with pytest.raises(ValueError):
            solve_equilibrium_exact(tree, PolynomialSpec((1.0,)), OpinionState([0.5], [0.5]))


class TestMAE:
    def test_identical(self):
        assert mean_absolute_error([0.3, 0.4], [0.3, 0.4]) == 0.0

    def test_swapped(self):
        assert mean_absolute_error([0, 1], [1, 0]) == 1.0

    def test_mismatch(self):
        with pytest.raises(ValueError):
            mean_absolute_error([0, 1], [1])
