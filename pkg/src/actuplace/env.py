"""Sequential-placement MDP: state encoding, reward, termination.

The state a policy sees is built from projection residuals: every candidate
displacement column and the deviation vector are projected onto the
orthogonal complement of the selected columns' span, L2-normalized row by
row, and stacked together with a selection-mask column into an
(m+1) x (n+1) matrix.  Stepping selects one new position, re-solves the
minimax LP, and pays the gap reduction scaled by the current gap norm:

    r_t = (f(S_t) - f(S_{t+1})) / ||delta_{S_t}||_2
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    EpisodeFinishedError,
    InvalidActionError,
    InvalidBudgetError,
)
from .model import Instance
from .selection import SelectionState

# residual rows at or below this norm are treated as exact zeros
ZERO_TOL = 1e-12
# basis vectors whose residual drops below this (relative) size are dependent
DROP_TOL = 1e-10
# gap norms at or below this make the reward denominator unusable
GUARD_TOL = 1e-12


def project_residuals(inst: Instance, selected) -> tuple:
    """Residuals of all U columns and psi against the selected columns' span.

    Returns (U_o, psi_o) where column e of U_o is the component of U[:, e]
    orthogonal to span{U[:, j] : j in selected}; selected columns come back
    exactly zero.  Modified Gram-Schmidt with a reorthogonalization pass;
    dependent columns are dropped from the basis, not errors.
    """
    sel = [int(j) for j in selected]
    if not sel:
        return inst.U.copy(), inst.psi.copy()

    basis = []
    for j in sel:
        v = inst.U[:, j].copy()
        nrm0 = np.linalg.norm(v)
        for q in basis:
            v -= (q @ v) * q
        for q in basis:
            v -= (q @ v) * q
        nrm = np.linalg.norm(v)
        if nrm > DROP_TOL * max(1.0, nrm0):
            basis.append(v / nrm)

    if basis:
        B = np.column_stack(basis)
        U_o = inst.U - B @ (B.T @ inst.U)
        U_o -= B @ (B.T @ U_o)
        psi_o = inst.psi - B @ (B.T @ inst.psi)
        psi_o -= B @ (B.T @ psi_o)
    else:
        U_o = inst.U.copy()
        psi_o = inst.psi.copy()
    U_o[:, sel] = 0.0
    return U_o, psi_o


@dataclass(frozen=True)
class StateMatrix:
    """(m+1) x (n+1) policy state.

    Rows 0..m-1: normalized residual displacement rows.  Row m, first n
    entries: normalized residual deviation.  Column n: selection mask
    (entry [m, n] unused, fixed 0).
    """

    grid: np.ndarray

    @property
    def m(self) -> int:
        return self.grid.shape[0] - 1

    @property
    def n(self) -> int:
        return self.grid.shape[1] - 1

    @property
    def mask(self) -> np.ndarray:
        """Length-m selection mask: 1 where the position is taken."""
        return self.grid[:-1, -1]

    def unmasked(self) -> np.ndarray:
        return np.where(self.mask == 0.0)[0]


def encode_state(inst: Instance, state: SelectionState) -> StateMatrix:
    U_o, psi_o = project_residuals(inst, state.selected)
    grid = np.zeros((inst.m + 1, inst.n + 1))
    for e in range(inst.m):
        row = U_o[:, e]
        nrm = np.linalg.norm(row)
        if nrm > ZERO_TOL:
            grid[e, : inst.n] = row / nrm
    nrm = np.linalg.norm(psi_o)
    if nrm > ZERO_TOL:
        grid[inst.m, : inst.n] = psi_o / nrm
    for j in state.selected:
        grid[j, inst.n] = 1.0
    return StateMatrix(grid=grid)


@dataclass(frozen=True)
class Transition:
    state: StateMatrix
    action: int
    reward: float
    next_state: StateMatrix
    done: bool


@dataclass(frozen=True)
class EpisodeConfig:
    """Termination rule: fixed budget or gap-specification threshold."""

    mode: str  # "budget" | "spec-limit"
    budget: int = 0
    limit_mg: float = 0.0

    def __post_init__(self):
        if self.mode == "budget":
            if self.budget < 1:
                raise InvalidBudgetError("budget must be >= 1")
        elif self.mode == "spec-limit":
            if not self.limit_mg > 0.0:
                raise ValueError("limit_mg must be positive")
        else:
            raise ValueError("mode must be 'budget' or 'spec-limit'")

    @classmethod
    def for_budget(cls, M: int) -> "EpisodeConfig":
        return cls(mode="budget", budget=int(M))

    @classmethod
    def for_spec_limit(cls, limit_mg: float) -> "EpisodeConfig":
        return cls(mode="spec-limit", limit_mg=float(limit_mg))


class PlacementEnv:
    """One episode of sequential actuator placement on a fixed instance."""

    def __init__(self, inst: Instance, config: EpisodeConfig):
        if config.mode == "budget" and config.budget > inst.m:
            raise InvalidBudgetError(
                "budget %d exceeds %d candidates" % (config.budget, inst.m))
        self.inst = inst
        self.config = config
        self._sel = None
        self._encoded = None
        self._done = True

    @property
    def selection(self) -> SelectionState:
        return self._sel

    @property
    def done(self) -> bool:
        return self._done

    @property
    def state(self) -> StateMatrix:
        return self._encoded

    def gap_norm(self) -> float:
        """L2 norm of the current gap vector (the reward denominator)."""
        return float(np.linalg.norm(self._sel.solution.delta))

    def valid_actions(self):
        return [e for e in range(self.inst.m) if e not in self._sel.selected]

    def reset(self) -> StateMatrix:
        self._sel = SelectionState.empty(self.inst)
        self._encoded = encode_state(self.inst, self._sel)
        self._done = False
        return self._encoded

    def step(self, action) -> Transition:
        if self._done or self._sel is None:
            raise EpisodeFinishedError("episode is finished; call reset()")
        a = int(action)
        if a < 0 or a >= self.inst.m or a in self._sel.selected:
            raise InvalidActionError("action %d is masked or out of range" % a)

        prev = self._sel.solution
        denom = float(np.linalg.norm(prev.delta))
        new_sel = self._sel.add(self.inst, a)
        taken = len(new_sel.selected)

        if denom <= GUARD_TOL:
            # already a perfect fit; nothing left to reward
            reward = 0.0
            done = True
        else:
            reward = (prev.d - new_sel.solution.d) / denom
            if self.config.mode == "budget":
                done = taken == self.config.budget
            else:
                done = (new_sel.solution.d < self.config.limit_mg
                        or taken == self.inst.m)

        next_enc = encode_state(self.inst, new_sel)
        tr = Transition(state=self._encoded, action=a, reward=reward,
                        next_state=next_enc, done=done)
        self._sel = new_sel
        self._encoded = next_enc
        self._done = done
        return tr
