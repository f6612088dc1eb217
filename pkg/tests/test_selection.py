import itertools

import numpy as np
import pytest

from actuplace.errors import (
    DuplicateSelectionError,
    InvalidBudgetError,
    TooLargeError,
)
from actuplace.lp import solve_minimax_gap
from actuplace.model import Instance, max_gap
from actuplace.selection import (
    SelectionState,
    exhaustive_select,
    greedy_select,
    marginal_gain,
)
from tests.conftest import make_instance


def exhaustive_oracle(inst, M):
    # independent enumeration with the same lexicographic tie-break
    best_set, best_d = None, None
    for subset in itertools.combinations(range(inst.m), M):
        d = solve_minimax_gap(inst, subset).d
        if best_d is None or d < best_d - 1e-12:
            best_set, best_d = subset, d
    return best_set, best_d


def test_empty_state():
    inst = make_instance(np.random.default_rng(20), n=4, m=3)
    state = SelectionState.empty(inst)
    assert state.selected == ()
    assert state.solution.d == max_gap(inst.psi)


def test_add_grows_selection():
    inst = make_instance(np.random.default_rng(21), n=4, m=3)
    state = SelectionState.empty(inst).add(inst, 1)
    assert state.selected == (1,)
    assert state.solution.d == solve_minimax_gap(inst, (1,)).d
    with pytest.raises(DuplicateSelectionError):
        state.add(inst, 1)


def test_marginal_gain_matches_resolve_oracle():
    rng = np.random.default_rng(22)
    for _ in range(10):
        inst = make_instance(rng, n=6, m=4)
        size = int(rng.integers(0, 3))
        S = tuple(int(p) for p in rng.choice(4, size=size, replace=False))
        state = SelectionState(selected=S, solution=solve_minimax_gap(inst, S))
        for e in range(4):
            if e in S:
                continue
            want = solve_minimax_gap(inst, S).d - solve_minimax_gap(inst, S + (e,)).d
            assert marginal_gain(inst, state, e) == pytest.approx(want, abs=1e-12)


def test_marginal_gain_duplicate_rejected():
    inst = make_instance(np.random.default_rng(23), n=4, m=3)
    state = SelectionState.empty(inst).add(inst, 0)
    with pytest.raises(DuplicateSelectionError):
        marginal_gain(inst, state, 0)


def test_duplicate_column_second_copy_worthless():
    # two identical columns with identical bounds: once one is in, the
    # marginal gain of the clone is exactly zero
    rng = np.random.default_rng(24)
    col = rng.standard_normal(5)
    U = np.column_stack([col, col, rng.standard_normal(5)])
    inst = Instance(psi=rng.standard_normal(5), U=U,
                    f_lower=-3.0 * np.ones(3), f_upper=3.0 * np.ones(3))
    state = SelectionState.empty(inst).add(inst, 0)
    assert marginal_gain(inst, state, 1) == pytest.approx(0.0, abs=1e-9)


def test_cancelling_column_gain_is_initial_gap():
    psi = np.array([2.0, -1.0, 0.5])
    U = np.column_stack([psi, np.array([1.0, 1.0, 1.0])])
    inst = Instance(psi=psi, U=U, f_lower=-2.0 * np.ones(2),
                    f_upper=2.0 * np.ones(2))
    state = SelectionState.empty(inst)
    assert marginal_gain(inst, state, 0) == pytest.approx(2.0, abs=1e-9)


def test_greedy_ties_go_to_lowest_index():
    rng = np.random.default_rng(25)
    col = rng.standard_normal(4)
    U = np.column_stack([col, col])
    inst = Instance(psi=rng.standard_normal(4), U=U,
                    f_lower=-3.0 * np.ones(2), f_upper=3.0 * np.ones(2))
    state = greedy_select(inst, 1)
    assert state.selected == (0,)


def test_greedy_deterministic():
    inst = make_instance(np.random.default_rng(26), n=6, m=5)
    a = greedy_select(inst, 3)
    b = greedy_select(inst, 3)
    assert a.selected == b.selected
    assert a.solution.d == b.solution.d


def test_greedy_prefix_nesting():
    # greedy is incremental, so smaller budgets are prefixes of larger ones
    inst = make_instance(np.random.default_rng(27), n=6, m=5)
    seqs = [greedy_select(inst, M).selected for M in (1, 2, 3, 4)]
    for small, big in zip(seqs, seqs[1:]):
        assert big[: len(small)] == small
    ds = [greedy_select(inst, M).solution.d for M in (1, 2, 3, 4)]
    for d_small, d_big in zip(ds, ds[1:]):
        assert d_big <= d_small + 1e-9


def test_greedy_budget_validation():
    inst = make_instance(np.random.default_rng(28), n=4, m=3)
    with pytest.raises(InvalidBudgetError):
        greedy_select(inst, 0)
    with pytest.raises(InvalidBudgetError):
        greedy_select(inst, 4)


def test_exhaustive_matches_independent_enumeration():
    rng = np.random.default_rng(29)
    for _ in range(6):
        inst = make_instance(rng, n=5, m=5)
        state = exhaustive_select(inst, 2)
        want_set, want_d = exhaustive_oracle(inst, 2)
        assert state.solution.d == pytest.approx(want_d, abs=1e-9)
        assert state.selected == want_set


def test_exhaustive_budget_zero_is_empty_set():
    inst = make_instance(np.random.default_rng(30), n=4, m=3)
    state = exhaustive_select(inst, 0)
    assert state.selected == ()
    assert state.solution.d == max_gap(inst.psi)


def test_exhaustive_guard():
    inst = make_instance(np.random.default_rng(31), n=3, m=30)
    with pytest.raises(TooLargeError):
        exhaustive_select(inst, 15)
    with pytest.raises(InvalidBudgetError):
        exhaustive_select(inst, -1)


def test_exhaustive_never_worse_than_greedy():
    rng = np.random.default_rng(32)
    for _ in range(8):
        inst = make_instance(rng, n=5, m=5)
        g = greedy_select(inst, 2).solution.d
        x = exhaustive_select(inst, 2).solution.d
        assert x <= g + 1e-9
