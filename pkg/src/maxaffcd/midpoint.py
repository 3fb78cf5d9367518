"""Coordinate descent with the mid-point rule, and a cycle it can fall into.

Here the coordinate update looks at *all* affine functions, constant ones
included, and jumps to the middle of the resulting minimizer interval.
With coefficients in {-1, 0, +1} this is the same point the
ignore-constant rule picks; with other coefficients the two rules part
ways and the mid-point rule can loop forever.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import envelope
from .envelope import MinimizerInterval, UnboundedMinimumError  # noqa: F401  (re-exported)
from .maxaff import MaxAffInstance, apply_step, evaluate, initial_state


def minimizer_interval(instance: MaxAffInstance, state, j: int) -> MinimizerInterval:
    """Exact minimizer interval of ``x_j -> f(x)`` over every row."""
    xj = state.x[j]
    coef = dict(instance.columns[j])
    lines = []
    for i, yi in enumerate(state.y):
        a = coef.get(i, 0)
        lines.append((a, yi - a * xj))
    return envelope.minimize(lines)


def midpoint_update(instance: MaxAffInstance, state, j: int):
    return apply_step(instance, state, j, minimizer_interval(instance, state, j).midpoint)


@dataclass
class Trajectory:
    iterates: list
    coords: list
    objectives: list
    period: int | None = None
    cycle_start: int | None = None
    fixed: bool = False


def run_midpoint(instance: MaxAffInstance, x0=None, order=None, max_updates: int = 1000) -> Trajectory:
    """Cyclic mid-point updates until an exact state recurs.

    A state is the iterate plus the position in the update order. If the
    recurring loop consists of zero steps only the run reached a fixed
    point (``fixed=True``); otherwise ``period`` is the loop length.
    """
    state = initial_state(instance, x0)
    perm = list(range(instance.n)) if order is None else [int(j) for j in order]
    if sorted(perm) != list(range(instance.n)):
        raise ValueError("order is not a permutation of the variables")
    traj = Trajectory(iterates=[tuple(state.x)], coords=[], objectives=[max(state.y)])
    seen = {(tuple(state.x), 0): 0}
    steps = []
    for step in range(max_updates):
        pos = step % len(perm)
        j = perm[pos]
        steps.append(midpoint_update(instance, state, j))
        traj.iterates.append(tuple(state.x))
        traj.coords.append(j)
        traj.objectives.append(max(state.y))
        key = (tuple(state.x), (pos + 1) % len(perm))
        if key in seen:
            start = seen[key]
            if all(d == 0 for d in steps[start:]):
                traj.fixed = True
            else:
                traj.period = len(steps) - start
                traj.cycle_start = start
            break
        seen[key] = len(steps)
    return traj


# Twelve points in R^3, listed in pairs: row r of the table is (left, right).
CYCLE_POINTS = (
    ((-2, 0, 0), (2, 0, 0)),
    ((0, -1, 0), (0, 3, 0)),
    ((0, 1, -1), (0, 1, 3)),
    ((-1, 1, 1), (3, 1, 1)),
    ((1, -2, 1), (1, 2, 1)),
    ((1, 0, -2), (1, 0, 2)),
)

CYCLE_ITERATES = ((0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 0, 1), (1, 0, 0))

# a . x <= b, each tight at exactly one point (index into the flattened point list)
CYCLE_HALFSPACES = (
    (("-1", "0", "0"), "2", 0),
    (("-3.5", "-8", "-5"), "8", 2),
    (("-5", "3.5", "-8"), "11.5", 4),
    (("-8", "5", "3.5"), "16.5", 6),
    (("0", "-1", "0"), "2", 8),
    (("0", "0", "-1"), "2", 10),
    (("8", "-5", "-3.5"), "16", 1),
    (("0", "1", "0"), "3", 3),
    (("0", "0", "1"), "3", 5),
    (("1", "0", "0"), "3", 7),
    (("3.5", "8", "5"), "24.5", 9),
    (("5", "-3.5", "8"), "21", 11),
)


def cycle_points():
    return [tuple(Fraction(v) for v in p) for pair in CYCLE_POINTS for p in pair]


def cycle_halfspaces():
    return [
        (tuple(Fraction(a) for a in coeffs), Fraction(b), designated)
        for coeffs, b, designated in CYCLE_HALFSPACES
    ]


def cycle_instance() -> MaxAffInstance:
    """``f(x) = max{0, max_k (a_k . x - b_k)}`` in exact arithmetic."""
    rows = [(Fraction(0), [])]
    for coeffs, b, _ in cycle_halfspaces():
        rows.append((-b, [(j, a) for j, a in enumerate(coeffs) if a != 0]))
    return MaxAffInstance.from_rows(rows, n=3, mode="exact")


@dataclass
class CycleReport:
    points_feasible: bool
    tight_exactly_designated: bool
    trajectory_matches: bool
    trajectory: Trajectory
    failures: list

    @property
    def ok(self) -> bool:
        return self.points_feasible and self.tight_exactly_designated and self.trajectory_matches


def verify_cycle_instance() -> CycleReport:
    points = cycle_points()
    halfspaces = cycle_halfspaces()
    failures = []
    feasible = True
    tight_ok = True
    for h, (a, b, designated) in enumerate(halfspaces):
        tight = []
        for p_idx, p in enumerate(points):
            value = sum(ai * pi for ai, pi in zip(a, p))
            if value > b:
                feasible = False
                failures.append(f"point {p_idx} violates halfspace {h}")
            elif value == b:
                tight.append(p_idx)
        if tight != [designated]:
            tight_ok = False
            failures.append(f"halfspace {h} tight at {tight}, expected [{designated}]")
    if sorted(d for _, _, d in halfspaces) != list(range(len(points))):
        tight_ok = False
        failures.append("designated points are not a bijection")

    traj = run_midpoint(cycle_instance(), x0=(0, 0, 0), max_updates=60)
    expected = [tuple(Fraction(v) for v in p) for p in CYCLE_ITERATES]
    # iterates after each update; the first update leaves the origin in place
    got = traj.iterates[1:8]
    matches = traj.period == 6 and traj.cycle_start == 1 and got == expected + expected[:1]
    if not matches:
        failures.append(f"trajectory {got} period {traj.period}")
    # the slice endpoints must be the two table points of the next row
    for r in range(6):
        left, right = CYCLE_POINTS[(r + 1) % 6]
        mid = tuple((Fraction(a) + Fraction(b)) / 2 for a, b in zip(left, right))
        if mid != expected[(r + 1) % 6]:
            matches = False
            failures.append(f"table row {r + 1} midpoint mismatch")
    return CycleReport(feasible, tight_ok, matches, traj, failures)


def objective(instance, x):
    return evaluate(instance, x)[1]
