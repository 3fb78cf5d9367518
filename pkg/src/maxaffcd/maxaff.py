"""Coordinate descent on a pointwise maximum of sparse affine functions.

The objective is ``f(x) = max_i (a_i . x + b_i)``. Each inner update
minimizes over one coordinate ``x_j`` only the affine functions that
actually depend on it (rows with ``a_ij != 0``); under sign consistency
that minimizer is unique.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import envelope
from ._numeric import NumericMode, converter, is_finite


class Verdict(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_SWEEPS = "MaxSweepsReached"
    DIVERGING = "Diverging"
    UNBOUNDED = "UnboundedAfterPrune"
    CONSTANT = "ConstantAfterPrune"


class AssumptionError(ValueError):
    """A column lacks a positive or a negative coefficient."""


@dataclass(frozen=True)
class MaxAffInstance:
    """``m`` affine functions in ``n`` variables, stored row-wise and column-wise.

    ``rows[i]`` is ``(b_i, ((j, a_ij), ...))``. Build instances with
    :meth:`from_rows` or :meth:`from_dense`; both validate.
    """

    m: int
    n: int
    rows: tuple
    columns: tuple = field(repr=False)
    mode: NumericMode = NumericMode.FLOAT

    @classmethod
    def from_rows(cls, rows, n=None, mode=NumericMode.FLOAT) -> "MaxAffInstance":
        mode = NumericMode.coerce(mode)
        conv = converter(mode)
        built = []
        max_col = -1
        for i, (b, terms) in enumerate(rows):
            b = conv(b)
            seen = set()
            row_terms = []
            for j, a in terms:
                if isinstance(j, bool) or int(j) != j or j < 0:
                    raise ValueError(f"row {i}: bad column index {j!r}")
                j = int(j)
                if j in seen:
                    raise ValueError(f"row {i}: duplicate entry for column {j}")
                seen.add(j)
                a = conv(a)
                if a == 0:
                    raise ValueError(f"row {i}: zero coefficient stored for column {j}")
                row_terms.append((j, a))
                max_col = max(max_col, j)
            row_terms.sort()
            built.append((b, tuple(row_terms)))
        if n is None:
            n = max_col + 1
        if max_col >= n:
            raise ValueError(f"column index {max_col} out of range for n={n}")
        if not built:
            raise ValueError("instance has no rows")
        cols = [[] for _ in range(n)]
        for i, (_, terms) in enumerate(built):
            for j, a in terms:
                cols[j].append((i, a))
        return cls(
            m=len(built),
            n=int(n),
            rows=tuple(built),
            columns=tuple(tuple(c) for c in cols),
            mode=mode,
        )

    @classmethod
    def from_dense(cls, A, b, mode=NumericMode.FLOAT) -> "MaxAffInstance":
        rows = []
        n = None
        for a_row, b_i in zip(A, b, strict=True):
            a_row = list(a_row)
            n = len(a_row) if n is None else n
            if len(a_row) != n:
                raise ValueError("ragged coefficient matrix")
            rows.append((b_i, [(j, a) for j, a in enumerate(a_row) if a != 0]))
        return cls.from_rows(rows, n=n, mode=mode)

    @property
    def offsets(self):
        return [b for b, _ in self.rows]

    def to_dense(self):
        A = [[0] * self.n for _ in range(self.m)]
        for i, (_, terms) in enumerate(self.rows):
            for j, a in terms:
                A[i][j] = a
        return A, self.offsets

    def coefficients(self):
        for _, terms in self.rows:
            for _, a in terms:
                yield a

    def with_mode(self, mode) -> "MaxAffInstance":
        mode = NumericMode.coerce(mode)
        if mode is self.mode:
            return self
        if mode is NumericMode.EXACT:
            # float -> exact is only sound for values that are exact binary fractions
            conv = Fraction
        else:
            conv = float
        rows = [(conv(b), [(j, conv(a)) for j, a in t]) for b, t in self.rows]
        return MaxAffInstance.from_rows(rows, n=self.n, mode=mode)


@dataclass
class IterateState:
    x: list
    y: list
    sweep: int = 0
    eta: object = 0
    updates_done: int = 0


@dataclass
class RunReport:
    verdict: Verdict
    x: list
    y: list
    sweeps: int
    eta: object
    objective: object
    updates: int = 0
    pruned: Optional[MaxAffInstance] = None
    kept_rows: tuple = ()
    kept_columns: tuple = ()
    trace: list = field(default_factory=list)
    energy_ledger: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return all(row.passed for row in self.energy_ledger)


def _vector(values, n, mode, what):
    conv = converter(mode)
    values = list(values)
    if len(values) != n:
        raise ValueError(f"{what} has length {len(values)}, expected {n}")
    out = [conv(v) for v in values]
    if not all(is_finite(v) for v in out):
        raise ValueError(f"{what} has non-finite entries")
    return out


def evaluate(instance: MaxAffInstance, x):
    """Return ``(y, f)`` with ``y = Ax + b`` and ``f = max(y)``."""
    x = _vector(x, instance.n, instance.mode, "x")
    y = [b + sum(a * x[j] for j, a in terms) for b, terms in instance.rows]
    return y, max(y)


def initial_state(instance: MaxAffInstance, x0=None) -> IterateState:
    zero = Fraction(0) if instance.mode is NumericMode.EXACT else 0.0
    x = [zero] * instance.n if x0 is None else _vector(x0, instance.n, instance.mode, "x0")
    y, _ = evaluate(instance, x)
    return IterateState(x=list(x), y=y, eta=zero)


def check_sign_consistency(instance: MaxAffInstance):
    """Per column ``(has_positive, has_negative)``."""
    return [
        (any(a > 0 for _, a in col), any(a < 0 for _, a in col))
        for col in instance.columns
    ]


def satisfies_assumption(instance: MaxAffInstance) -> bool:
    return all(p and q for p, q in check_sign_consistency(instance))


@dataclass(frozen=True)
class PruneResult:
    instance: Optional[MaxAffInstance]
    verdict: Optional[Verdict]
    kept_rows: tuple
    kept_columns: tuple
    constant_value: object = None


def prune(instance: MaxAffInstance) -> PruneResult:
    """Delete rows touching sign-inconsistent columns until none remain.

    Such rows can be pushed down without bound while leaving every other
    row unchanged, so the infimum of ``f`` is unaffected. ``verdict`` is
    ``None`` when a non-trivial instance survives.
    """
    alive = set(range(instance.m))
    removed_nonconstant = False
    while True:
        bad = []
        for j, col in enumerate(instance.columns):
            live = [a for i, a in col if i in alive]
            if live and not (any(a > 0 for a in live) and any(a < 0 for a in live)):
                bad.append(j)
        if not bad:
            break
        for j in bad:
            for i, _ in instance.columns[j]:
                if i in alive:
                    alive.discard(i)
                    removed_nonconstant = True
    kept_rows = tuple(sorted(alive))
    kept_cols = tuple(
        j for j, col in enumerate(instance.columns) if any(i in alive for i, _ in col)
    )
    if not kept_cols:
        if kept_rows:
            value = max(instance.rows[i][0] for i in kept_rows)
            return PruneResult(None, Verdict.CONSTANT, kept_rows, (), value)
        verdict = Verdict.UNBOUNDED if removed_nonconstant else Verdict.CONSTANT
        return PruneResult(None, verdict, (), ())
    remap = {j: k for k, j in enumerate(kept_cols)}
    rows = [
        (instance.rows[i][0], [(remap[j], a) for j, a in instance.rows[i][1]])
        for i in kept_rows
    ]
    pruned = MaxAffInstance.from_rows(rows, n=len(kept_cols), mode=instance.mode)
    return PruneResult(pruned, None, kept_rows, kept_cols)


def _column_lines(instance, state, j):
    xj = state.x[j]
    pos, neg = [], []
    for i, a in instance.columns[j]:
        line = (a, state.y[i] - a * xj)
        (pos if a > 0 else neg).append(line)
    return pos, neg


def coordinate_minimizer(instance: MaxAffInstance, state: IterateState, j: int):
    """Unique minimizer over ``x_j`` of the rows that depend on ``x_j``."""
    pos, neg = _column_lines(instance, state, j)
    if not pos or not neg:
        raise AssumptionError(f"column {j} is not sign consistent; prune first")
    return envelope.crossing(pos, neg)


def closed_form_minimizer(instance: MaxAffInstance, state: IterateState, j: int):
    """Minimizer for columns whose nonzeros are all +1 or -1."""
    pos, neg = _column_lines(instance, state, j)
    if any(a not in (1, -1) for a, _ in pos + neg):
        raise ValueError(f"column {j} has coefficients other than +-1")
    if not pos or not neg:
        raise AssumptionError(f"column {j} is not sign consistent; prune first")
    return (max(c for _, c in neg) - max(c for _, c in pos)) / 2


def apply_step(instance: MaxAffInstance, state: IterateState, j: int, target):
    """Move ``x_j`` to ``target``, patch ``y`` incrementally, return the step."""
    d = target - state.x[j]
    if d:
        for i, a in instance.columns[j]:
            state.y[i] += a * d
        state.x[j] = target
    if abs(d) > state.eta:
        state.eta = abs(d)
    state.updates_done += 1
    return d


def apply_update(instance: MaxAffInstance, state: IterateState, j: int):
    return apply_step(instance, state, j, coordinate_minimizer(instance, state, j))


def fixed_point_residual(instance: MaxAffInstance, state: IterateState):
    return max(
        (abs(state.x[j] - coordinate_minimizer(instance, state, j)) for j in range(instance.n)),
        default=0,
    )


def resolve_order(order, n, seed=None) -> list:
    """Turn ``"cyclic"``, ``"shuffle"`` or an explicit permutation into a list."""
    if order is None or (isinstance(order, str) and order == "cyclic"):
        return list(range(n))
    if isinstance(order, str):
        if order != "shuffle":
            raise ValueError(f"unknown order {order!r}")
        perm = list(range(n))
        random.Random(seed).shuffle(perm)
        return perm
    perm = [int(j) for j in order]
    if sorted(perm) != list(range(n)):
        raise ValueError("order is not a permutation of the variables")
    return perm


def _uniform_drop(before, after, rows_nonconstant, exact):
    """Common decrease of all non-constant rows over a sweep, else ``None``."""
    shifts = [after[i] - before[i] for i in rows_nonconstant]
    if not shifts:
        return None
    first = shifts[0]
    if first >= 0:
        return None
    if exact:
        same = all(s == first for s in shifts)
    else:
        scale = max(1.0, max(abs(v) for v in before))
        same = all(abs(s - first) <= 1e-12 * scale for s in shifts)
    return -first if same else None


@dataclass
class EnergyRow:
    update: int
    coord: int
    step: object
    before: object
    after: object
    margin: object

    @property
    def passed(self) -> bool:
        return self.margin >= 0


def run(
    instance: MaxAffInstance,
    x0=None,
    eps=1e-9,
    max_sweeps: int = 10000,
    order="cyclic",
    seed=None,
    divergence_budget=None,
    detect_drift: bool = True,
    certify: bool = False,
    trace: bool = False,
    rule: str = "ignore-constant",
    callback: Optional[Callable] = None,
) -> RunReport:
    """Coordinate descent sweeps until the largest step in a sweep is below ``eps``.

    The instance is pruned first; pruned-away variables keep their
    starting values. ``callback(j, d, y_before, y_after)`` runs after every
    inner update with copies of the maintained residual (it is only
    materialised when a callback, ``certify`` or ``trace`` needs it).

    ``rule="midpoint"`` replaces the minimizer by the midpoint of the full
    minimizer interval (see :mod:`maxaffcd.midpoint`).
    """
    if eps is None or eps < 0:
        raise ValueError("eps must be >= 0")
    if max_sweeps is None or max_sweeps < 1:
        raise ValueError("max_sweeps must be a positive integer")
    exact = instance.mode is NumericMode.EXACT
    if exact:
        eps = Fraction(eps) if not isinstance(eps, str) else Fraction(eps)
    state = initial_state(instance, x0)
    pr = prune(instance)
    if pr.verdict is not None:
        _, f = evaluate(instance, state.x)
        obj = pr.constant_value if pr.verdict is Verdict.CONSTANT else f
        return RunReport(
            pr.verdict, state.x, state.y, 0, state.eta, obj,
            kept_rows=pr.kept_rows, kept_columns=pr.kept_columns,
        )
    sub = pr.instance
    sub_state = initial_state(sub, [state.x[j] for j in pr.kept_columns])
    perm = resolve_order(order, sub.n, seed)
    if rule == "midpoint":
        from .midpoint import minimizer_interval

        def target(j):
            return minimizer_interval(sub, sub_state, j).midpoint
    elif rule == "ignore-constant":
        def target(j):
            return coordinate_minimizer(sub, sub_state, j)
    else:
        raise ValueError(f"unknown rule {rule!r}")

    if certify:
        from .energy import energy, slopes

        bounds = slopes(sub)
    nonconstant = [i for i, (_, terms) in enumerate(sub.rows) if terms]
    floor_start = min(sub_state.y)
    if divergence_budget is None:
        divergence_budget = 10**6 * (1 + max(abs(b) for b in sub.offsets))
    report_rows = []
    ledger = []
    zero = sub_state.eta
    verdict = Verdict.MAX_SWEEPS
    need_copy = certify or trace or callback is not None
    f_current = max(sub_state.y)
    while sub_state.sweep < max_sweeps:
        sub_state.eta = zero
        sweep_start_y = list(sub_state.y)
        sub_state.sweep += 1
        for j in perm:
            y_before = list(sub_state.y) if need_copy else None
            d = apply_step(sub, sub_state, j, target(j))
            if need_copy:
                y_after = list(sub_state.y)
                if certify:
                    e_before, e_after = energy(y_before, bounds.k), energy(y_after, bounds.k)
                    ledger.append(EnergyRow(
                        sub_state.updates_done, pr.kept_columns[j], abs(d),
                        e_before, e_after, e_before - e_after - bounds.c * abs(d),
                    ))
                if trace:
                    f_current = max(y_after)
                    report_rows.append(
                        (sub_state.sweep, sub_state.updates_done, pr.kept_columns[j],
                         d, sub_state.eta, f_current,
                         ledger[-1] if certify else None)
                    )
                if callback is not None:
                    callback(pr.kept_columns[j], d, y_before, y_after)
        if sub_state.eta < eps:
            verdict = Verdict.CONVERGED
            break
        if min(sub_state.y) < floor_start - divergence_budget:
            verdict = Verdict.DIVERGING
            break
        if detect_drift and _uniform_drop(sweep_start_y, sub_state.y, nonconstant, exact):
            # every later sweep repeats the same steps shifted down: a certificate
            verdict = Verdict.DIVERGING
            break
    for k, j in enumerate(pr.kept_columns):
        state.x[j] = sub_state.x[k]
    y_full, _ = evaluate(instance, state.x)
    return RunReport(
        verdict=verdict,
        x=state.x,
        y=y_full,
        sweeps=sub_state.sweep,
        eta=sub_state.eta,
        objective=max(sub_state.y),
        updates=sub_state.updates_done,
        pruned=sub,
        kept_rows=pr.kept_rows,
        kept_columns=pr.kept_columns,
        trace=report_rows,
        energy_ledger=ledger,
    )
