"""Problem data model: shape-control instances, forces, and gap metrics.

An instance couples an initial deviation profile over n measurement
coordinates with a displacement matrix whose column j gives the unit-force
response field of candidate actuator j.  Applying forces F at a subset S of
candidates yields the adjusted gap ``psi + U[:, S] @ F``; quality is judged
by the worst absolute gap (the L-infinity norm) and the RMS gap.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, InfeasibleForceError, InvalidPositionError


def _as_float_vector(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Instance:
    """One shape-control problem.

    psi      : length-n initial deviation at the measurement coordinates.
    U        : n x m displacement matrix; column j is the unit-force
               displacement field of candidate actuator j.
    f_lower  : length-m lower force bounds (must be <= 0).
    f_upper  : length-m upper force bounds (must be >= 0).

    Bounds straddle zero so an unused actuator can always be parked at zero
    force; that keeps the achievable worst gap nonincreasing under set
    inclusion.  All arrays are 64-bit floats and frozen after construction.
    """

    psi: np.ndarray
    U: np.ndarray
    f_lower: np.ndarray
    f_upper: np.ndarray

    def __post_init__(self):
        psi = _as_float_vector(self.psi, "psi")
        U = np.asarray(self.U, dtype=np.float64)
        f_lower = _as_float_vector(self.f_lower, "f_lower")
        f_upper = _as_float_vector(self.f_upper, "f_upper")
        if U.ndim != 2:
            raise ValueError(f"U must be a matrix, got shape {U.shape}")
        n, m = U.shape
        if n < 1 or m < 1:
            raise ValueError("U needs at least one row and one column")
        if psi.shape[0] != n:
            raise ValueError(f"psi has length {psi.shape[0]}, expected n={n}")
        if f_lower.shape[0] != m or f_upper.shape[0] != m:
            raise ValueError("force bounds must have length m=%d" % m)
        if not (np.isfinite(psi).all() and np.isfinite(U).all()
                and np.isfinite(f_lower).all() and np.isfinite(f_upper).all()):
            raise DegenerateInputError("instance data must be finite")
        if np.any(f_lower > 0.0) or np.any(f_upper < 0.0):
            raise DegenerateInputError(
                "force bounds must straddle zero (f_lower <= 0 <= f_upper)")
        zero_cols = np.where(~np.any(U != 0.0, axis=0))[0]
        if zero_cols.size:
            raise DegenerateInputError(
                f"U column(s) {zero_cols.tolist()} are all zero")
        for name, arr in (("psi", psi), ("U", U), ("f_lower", f_lower), ("f_upper", f_upper)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def m(self) -> int:
        return self.U.shape[1]


@dataclass(frozen=True)
class ForceVector:
    """Forces applied at an ordered subset of candidate positions."""

    positions: tuple
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        positions = tuple(int(p) for p in self.positions)
        values = _as_float_vector(self.values, "values")
        if len(positions) != values.shape[0]:
            raise ValueError("positions and values must have equal length")
        if len(set(positions)) != len(positions):
            raise ValueError("positions must be distinct")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.positions)

    @classmethod
    def empty(cls):
        return cls(positions=(), values=np.zeros(0))


def compute_gap(inst: Instance, forces: ForceVector) -> np.ndarray:
    """Adjusted gap ``psi + sum_j U[:, j] * F_j`` for the given forces.

    Raises InvalidPositionError for out-of-range positions and
    InfeasibleForceError when a force violates its box bound.
    """
    delta = inst.psi.copy()
    for pos, val in zip(forces.positions, forces.values):
        if not 0 <= pos < inst.m:
            raise InvalidPositionError(f"position {pos} outside [0, {inst.m})")
        if not (inst.f_lower[pos] <= val <= inst.f_upper[pos]):
            raise InfeasibleForceError(
                f"force {val} at position {pos} violates bounds "
                f"[{inst.f_lower[pos]}, {inst.f_upper[pos]}]")
        delta += inst.U[:, pos] * val
    return delta


def max_gap(delta) -> float:
    """Worst absolute gap: the L-infinity norm of the gap vector."""
    delta = np.asarray(delta, dtype=np.float64)
    if delta.size == 0:
        raise DegenerateInputError("max_gap of an empty gap vector")
    return float(np.max(np.abs(delta)))


def rms_gap(delta) -> float:
    """Root-mean-square gap: sqrt(mean(delta_i**2))."""
    delta = np.asarray(delta, dtype=np.float64)
    if delta.size == 0:
        raise DegenerateInputError("rms_gap of an empty gap vector")
    return float(np.sqrt(np.mean(delta * delta)))
