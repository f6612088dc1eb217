"""Subset selection over candidate actuator positions.

Greedy selection adds, one position at a time, the candidate with the
largest marginal drop in the minimax gap.  The exhaustive oracle enumerates
every subset of the budget size; it exists to measure how far greedy lands
from the true optimum on small instances.
"""

import itertools
import math
from dataclasses import dataclass

from .errors import (
    DuplicateSelectionError,
    InvalidBudgetError,
    TooLargeError,
)
from .lp import SubproblemSolution, solve_minimax_gap
from .model import Instance


@dataclass(frozen=True)
class SelectionState:
    """A selected subset in selection order, with its cached gap solve."""

    selected: tuple
    solution: SubproblemSolution

    @classmethod
    def empty(cls, inst: Instance) -> "SelectionState":
        return cls(selected=(), solution=solve_minimax_gap(inst, ()))

    def add(self, inst: Instance, e: int) -> "SelectionState":
        if e in self.selected:
            raise DuplicateSelectionError("position %d already selected" % e)
        sel = self.selected + (int(e),)
        return SelectionState(selected=sel,
                              solution=solve_minimax_gap(inst, sel))


def marginal_gain(inst: Instance, state: SelectionState, e: int) -> float:
    """Gap reduction from adding position ``e``:  f(S) - f(S + {e})."""
    if e in state.selected:
        raise DuplicateSelectionError("position %d already selected" % e)
    after = solve_minimax_gap(inst, state.selected + (int(e),))
    return state.solution.d - after.d


def _check_budget(inst: Instance, M: int) -> int:
    M = int(M)
    if M < 1 or M > inst.m:
        raise InvalidBudgetError(
            "budget %d outside 1..%d" % (M, inst.m))
    return M


def greedy_select(inst: Instance, M: int) -> SelectionState:
    """Pick M positions one at a time, each maximizing the marginal gain.

    Ties go to the lowest position index, so the selection sequence is a
    deterministic function of the instance.
    """
    M = _check_budget(inst, M)
    state = SelectionState.empty(inst)
    for _ in range(M):
        best_e = -1
        best_gain = -math.inf
        for e in range(inst.m):
            if e in state.selected:
                continue
            g = marginal_gain(inst, state, e)
            if g > best_gain:
                best_gain = g
                best_e = e
        state = state.add(inst, best_e)
    return state


def exhaustive_select(inst: Instance, M: int) -> SelectionState:
    """Enumerate all size-M subsets and return the one minimizing f(S).

    Because an extra actuator can always apply zero force, the size-M
    optimum is also optimal among all subsets of size <= M.  Ties go to the
    lexicographically smallest subset.
    """
    M = int(M)
    if M < 0 or M > inst.m:
        raise InvalidBudgetError("budget %d outside 0..%d" % (M, inst.m))
    n_subsets = math.comb(inst.m, M)
    if n_subsets > 100_000:
        raise TooLargeError(
            "C(%d, %d) = %d subsets exceeds the enumeration guard"
            % (inst.m, M, n_subsets))
    best = None
    for subset in itertools.combinations(range(inst.m), M):
        sol = solve_minimax_gap(inst, subset)
        if best is None or sol.d < best.solution.d:
            best = SelectionState(selected=subset, solution=sol)
    return best
