"""Linear programming layer: generic simplex front end and the minimax solve.

``simplex_solve`` handles  min c@x  s.t.  A_ub x <= b_ub,  lo <= x <= hi
by shifting to nonnegative variables and appending finite upper bounds as
rows, then calling the dense tableau kernel.

``solve_minimax_gap`` evaluates the placement objective

    f(S) = min_F  max_i |psi_i + (U_S F)_i|,   F within the force box,

as an LP in the split forces (F+, F-) and the reflected gap variable
e = (max|psi| + 1) - d.  Every right-hand side of that formulation is
nonnegative, so the solve never needs phase-1 artificials.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DegenerateInputError,
    DuplicateSelectionError,
    InvalidPositionError,
    NumericalFailureError,
)
from .model import ForceVector, Instance, max_gap


class SolveStatus(enum.Enum):
    OPTIMAL = 0
    INFEASIBLE = 1
    UNBOUNDED = 2
    ITERATION_LIMIT = 3


@dataclass(frozen=True)
class LPResult:
    status: SolveStatus
    x: np.ndarray | None
    objective: float
    iterations: int


def simplex_solve(c, A_ub, b_ub, lo, hi, tol=1e-9, max_iter=10_000):
    """Minimize ``c @ x`` subject to ``A_ub x <= b_ub`` and box bounds.

    ``lo`` must be finite; entries of ``hi`` may be ``np.inf``.  Returns an
    :class:`LPResult`; ``x`` is ``None`` unless the status is OPTIMAL.
    """
    c = np.atleast_1d(np.asarray(c, dtype=np.float64))
    A = np.asarray(A_ub, dtype=np.float64)
    if A.size == 0:
        A = A.reshape(0, c.shape[0])
    if A.ndim != 2 or A.shape[1] != c.shape[0]:
        raise ValueError("A_ub must be 2-D with one column per variable")
    b = np.atleast_1d(np.asarray(b_ub, dtype=np.float64))
    if b.shape[0] != A.shape[0]:
        raise ValueError("b_ub length must match the rows of A_ub")
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), c.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), c.shape).copy()
    if not np.all(np.isfinite(lo)):
        raise DegenerateInputError("lower bounds must be finite")
    if np.any(hi < lo):
        return LPResult(SolveStatus.INFEASIBLE, None, np.nan, 0)

    # shift y = x - lo >= 0; finite upper bounds become rows y_j <= hi_j - lo_j
    fin = np.where(np.isfinite(hi))[0]
    nv = c.shape[0]
    E = np.zeros((A.shape[0] + fin.shape[0], nv))
    E[: A.shape[0]] = A
    f = np.empty(E.shape[0])
    f[: A.shape[0]] = b - A @ lo
    for r, j in enumerate(fin):
        E[A.shape[0] + r, j] = 1.0
        f[A.shape[0] + r] = hi[j] - lo[j]

    status, y, niter = kernels.solve_standard_form(E, f, c, tol=tol,
                                                   max_iter=max_iter)
    st = SolveStatus(status)
    if st is not SolveStatus.OPTIMAL:
        return LPResult(st, None, np.nan, niter)
    x = y + lo
    return LPResult(st, x, float(c @ x), niter)


@dataclass(frozen=True)
class SubproblemSolution:
    """Optimal force assignment for a fixed actuator subset.

    ``d`` is the minimized worst absolute gap; ``delta`` the gap vector the
    returned forces achieve.  ``status`` is always OPTIMAL on a returned
    object; failed solves raise instead of returning.
    """

    d: float
    forces: ForceVector
    delta: np.ndarray
    status: SolveStatus
    iterations: int


def _check_positions(inst: Instance, positions) -> tuple:
    pos = tuple(int(p) for p in positions)
    for p in pos:
        if p < 0 or p >= inst.m:
            raise InvalidPositionError(
                "position %d outside 0..%d" % (p, inst.m - 1))
    if len(set(pos)) != len(pos):
        raise DuplicateSelectionError("positions must be distinct: %r" % (pos,))
    return pos


def solve_minimax_gap(inst: Instance, positions, tol=1e-9,
                      max_iter=10_000) -> SubproblemSolution:
    """Best-achievable worst-coordinate gap for the given actuator subset."""
    pos = _check_positions(inst, positions)
    k = len(pos)
    if k == 0:
        return SubproblemSolution(
            d=max_gap(inst.psi),
            forces=ForceVector.empty(),
            delta=inst.psi.copy(),
            status=SolveStatus.OPTIMAL,
            iterations=0,
        )

    Us = inst.U[:, pos]
    n = inst.n
    d0 = max_gap(inst.psi)
    top = d0 + 1.0

    # variables: [F+ (k), F- (k), e]  with  F = F+ - F-,  d = top - e
    nv = 2 * k + 1
    E = np.zeros((2 * n + 2 * k + 1, nv))
    f = np.empty(E.shape[0])
    #  U F + e <= top - psi    (upper side of |psi + U F| <= d)
    E[:n, :k] = Us
    E[:n, k:2 * k] = -Us
    E[:n, 2 * k] = 1.0
    f[:n] = top - inst.psi
    # -U F + e <= top + psi    (lower side)
    E[n:2 * n, :k] = -Us
    E[n:2 * n, k:2 * k] = Us
    E[n:2 * n, 2 * k] = 1.0
    f[n:2 * n] = top + inst.psi
    # force-box and gap bounds
    for j in range(k):
        E[2 * n + j, j] = 1.0
        f[2 * n + j] = inst.f_upper[pos[j]]
        E[2 * n + k + j, k + j] = 1.0
        f[2 * n + k + j] = -inst.f_lower[pos[j]]
    E[2 * n + 2 * k, 2 * k] = 1.0
    f[2 * n + 2 * k] = top

    c = np.zeros(nv)
    c[2 * k] = -1.0  # maximize e, i.e. minimize d

    status, x, niter = kernels.solve_standard_form(E, f, c, tol=tol,
                                                   max_iter=max_iter)
    if status != 0:
        raise NumericalFailureError(
            "minimax LP ended with status %d on %d positions" % (status, k))

    F = x[:k] - x[k:2 * k]
    F = np.clip(F, inst.f_lower[list(pos)], inst.f_upper[list(pos)])
    delta = inst.psi + Us @ F
    value = float(np.max(np.abs(delta)))
    d_lp = top - x[2 * k]
    if abs(value - d_lp) > 1e-6 * (1.0 + d0):
        raise NumericalFailureError(
            "LP objective %.3e disagrees with recomputed gap %.3e"
            % (d_lp, value))
    return SubproblemSolution(
        d=value,
        forces=ForceVector(positions=pos, values=F),
        delta=delta,
        status=SolveStatus.OPTIMAL,
        iterations=niter,
    )
