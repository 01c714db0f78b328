import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chanprot.homotopy import (
    CirculantOperator,
    DegeneratePathError,
    initial_state,
    kkt_violation,
    path_step,
    solve_to_cardinality,
    solve_to_tau,
    write_path_csv,
)
from oracles import circulant, exhaustive_lasso, lasso_objective, soft


def identity_op(m):
    g = np.zeros(m)
    g[0] = 1.0
    return CirculantOperator(g)


def sparse_instance(g, m, k):
    C = CirculantOperator(g.standard_normal(m))
    h = np.zeros(m)
    h[g.choice(m, k, replace=False)] = g.standard_normal(k)
    return C, h, C.matvec(h)


class TestOperator:
    def test_columns_are_shifts(self, rng):
        g = rng.standard_normal(7)
        C = CirculantOperator(g)
        np.testing.assert_array_equal(C.todense(), circulant(g))

    def test_fft_apply_matches_dense(self, rng):
        C = CirculantOperator(rng.standard_normal(12))
        v = rng.standard_normal(12)
        D = circulant(C.generator)
        np.testing.assert_allclose(C.matvec(v), D @ v, atol=1e-10)
        np.testing.assert_allclose(C.rmatvec(v), D.T @ v, atol=1e-10)


class TestSolveToCardinality:
    def test_zero_data(self):
        C = CirculantOperator(np.arange(1.0, 9.0))
        res = solve_to_cardinality(C, np.zeros(8), 2)
        assert res.status == "reached-tau" and res.tau_final == 0.0
        assert not np.any(res.solution)

    @pytest.mark.parametrize("alpha", [2.5, -0.7])
    def test_single_atom(self, rng, alpha):
        C = CirculantOperator(rng.standard_normal(16))
        y = alpha * C.columns([5])[:, 0]
        res = solve_to_cardinality(C, y, 1)
        assert res.support.tolist() == [5]
        assert np.sign(res.solution[5]) == np.sign(alpha)
        assert res.status == "reached-cardinality"

    def test_exhaustive_oracle_m10(self):
        g = np.random.default_rng(3)
        C, h, y = sparse_instance(g, 10, 2)
        res = solve_to_cardinality(C, y, 2)
        ref, _ = exhaustive_lasso(circulant(C.generator), y, res.tau_final)
        assert np.array_equal(res.support, np.flatnonzero(ref))
        np.testing.assert_allclose(res.solution, ref, atol=1e-6)

    def test_kkt_at_result(self, rng):
        C, h, y = sparse_instance(rng, 64, 4)
        y = y + 0.05 * rng.standard_normal(64)
        res = solve_to_cardinality(C, y, 4)
        assert res.support.size == 4
        assert kkt_violation(C, y, res.solution, res.tau_final) <= 1e-8

    def test_beats_truth_objective(self, rng):
        C, h, y = sparse_instance(rng, 32, 3)
        res = solve_to_cardinality(C, y, 3)
        D = circulant(C.generator)
        assert (lasso_objective(D, y, res.solution, res.tau_final)
                <= lasso_objective(D, y, h, res.tau_final) + 1e-12)

    def test_tau_floor_stops_early(self, rng):
        C, h, y = sparse_instance(rng, 32, 6)
        tau0 = np.max(np.abs(C.rmatvec(y)))
        res = solve_to_cardinality(C, y, 6, tau_floor=0.9 * tau0)
        assert res.status == "reached-tau"
        assert res.tau_final == pytest.approx(0.9 * tau0)

    def test_bad_arguments(self):
        C = identity_op(4)
        with pytest.raises(ValueError):
            solve_to_cardinality(C, np.ones(4), 5)
        with pytest.raises(ValueError):
            solve_to_cardinality(C, np.ones(4), 0)
        with pytest.raises(ValueError):
            solve_to_cardinality(C, np.ones(5), 1)

    def test_path_exhausted(self, rng):
        C, h, y = sparse_instance(rng, 16, 8)
        res = solve_to_cardinality(C, y, 8, max_steps=2)
        assert res.status == "path-exhausted"

    def test_path_csv(self, tmp_path, rng):
        C, h, y = sparse_instance(rng, 16, 2)
        res = solve_to_cardinality(C, y, 2)
        write_path_csv(res.path, tmp_path / "p.csv")
        lines = (tmp_path / "p.csv").read_text().splitlines()
        assert lines[0] == "breakpoint,tau,event,index,support_size"
        assert len(lines) == len(res.path) + 1


class TestPathStep:
    def test_first_event_is_argmax(self, rng):
        C = CirculantOperator(rng.standard_normal(12))
        y = rng.standard_normal(12)
        state = path_step(initial_state(C, y), C, y)
        assert state.active == [int(np.argmax(np.abs(C.rmatvec(y))))]
        assert state.event[0] == "add"

    def test_tie_goes_to_smallest_index(self):
        C = identity_op(6)
        y = np.array([0.5, -3.0, 1.0, 3.0, 0.0, 2.0])
        state = path_step(initial_state(C, y), C, y)
        assert state.active == [1] and state.signs.tolist() == [-1.0]
        state = path_step(state, C, y)
        assert state.active == [1, 3]

    def test_identity_entry_order(self):
        C = identity_op(5)
        y = np.array([1.0, -4.0, 2.0, 0.5, 3.0])
        state = initial_state(C, y)
        order = []
        for _ in range(5):
            state = path_step(state, C, y)
            order.append(state.event[1])
        assert order == [1, 4, 2, 0, 3]

    def test_collinear_columns_never_enter(self):
        C = CirculantOperator(np.ones(4))
        y = np.array([1.0, 2.0, 3.0, 4.0])
        res = solve_to_cardinality(C, y, 2)
        assert res.status == "reached-tau" and res.active == [0]

    def test_singular_active_set_is_degenerate(self):
        # period-2 generator: columns 0 and 2 coincide
        C = CirculantOperator(np.array([1.0, 0.0, 1.0, 0.0]))
        y = np.array([1.0, 2.0, 3.0, 4.0])
        state = initial_state(C, y)
        state.active = [0, 2]
        state.signs = np.array([1.0, 1.0])
        with pytest.raises(DegeneratePathError):
            path_step(state, C, y)

    @pytest.mark.parametrize("seed", range(5))
    def test_breakpoints_strictly_decrease(self, seed):
        g = np.random.default_rng(seed)
        C = CirculantOperator(g.standard_normal(8))
        y = g.standard_normal(8)
        res = solve_to_tau(C, y, 1e-9)
        taus = [b.tau for b in res.path if b.event in ("add", "remove", "floor")]
        # the very first add happens at tau0 itself
        assert all(b < a for a, b in zip(taus, taus[1:]))


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 3.0))
def test_identity_is_soft_threshold(seed, tau):
    y = np.random.default_rng(seed).standard_normal(16)
    res = solve_to_tau(identity_op(16), y, tau)
    np.testing.assert_allclose(res.solution, soft(y, tau), atol=1e-10, rtol=0)


@given(st.integers(0, 2**32 - 1), st.integers(4, 40), st.data())
def test_kkt_along_path(seed, m, data):
    g = np.random.default_rng(seed)
    C = CirculantOperator(g.standard_normal(m))
    y = g.standard_normal(m)
    state = initial_state(C, y)
    steps = data.draw(st.integers(1, min(m, 8)))
    for _ in range(steps):
        state = path_step(state, C, y)
        h = state.solution
        assert kkt_violation(C, y, h, state.tau) <= 1e-8


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_matches_exhaustive_oracle(seed, k):
    g = np.random.default_rng(seed)
    C, h, y = sparse_instance(g, 10, min(k, 2))
    res = solve_to_cardinality(C, y, k)
    ref, _ = exhaustive_lasso(circulant(C.generator), y, res.tau_final)
    assert np.array_equal(res.support, np.flatnonzero(ref))
    np.testing.assert_allclose(res.solution, ref, atol=1e-6)
