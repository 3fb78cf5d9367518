"""Brute-force references for the property tests.

Everything here is deliberately naive: enumeration of labelings and of
all pairwise line intersections. None of it shares code with the solvers
it is used to check.
"""
from __future__ import annotations

import functools
import itertools
from fractions import Fraction

import numpy as np

from .envelope import UnboundedMinimumError

MAX_LABELINGS = 10**6


class OracleSizeError(ValueError):
    pass


def _guard(n_labels, n_nodes):
    if n_labels**n_nodes > MAX_LABELINGS:
        raise OracleSizeError(
            f"{n_labels}^{n_nodes} labelings exceed the enumeration limit {MAX_LABELINGS}"
        )


def labelings(n_nodes, n_labels):
    _guard(n_labels, n_nodes)
    return itertools.product(range(n_labels), repeat=n_nodes)


def feature_map(model, labeling):
    """Active features of a labeling: ``(v, x)`` per node and ``(i, j, x, y)`` per edge."""
    active = {(v, x) for v, x in enumerate(labeling)}
    active |= {(i, j, labeling[i], labeling[j]) for i, j in model.pairwise}
    return active


def _is_exact(model):
    return any(isinstance(v, Fraction) for row in model.unary for v in row) or any(
        isinstance(v, Fraction) for m in model.pairwise.values() for r in m for v in r
    )


@functools.lru_cache(maxsize=16)
def _grid(V, L):
    grid = np.indices((L,) * V).reshape(V, -1)
    grid.flags.writeable = False
    return grid


def _all_values(model):
    """Objective of every labeling as a float array, enumeration order."""
    V, L = model.n_nodes, model.n_labels
    _guard(L, V)
    grid = _grid(V, L)
    unary = np.asarray(model.unary, dtype=float)
    total = unary[np.arange(V)[:, None], grid].sum(axis=0)
    for (i, j), mat in model.pairwise.items():
        total = total + np.asarray(mat, dtype=float)[grid[i], grid[j]]
    return grid, total


def brute_force_map(model):
    """``(F, argmax)``; ties go to the first labeling in lexicographic order."""
    if _is_exact(model):
        best, arg = None, None
        for lab in labelings(model.n_nodes, model.n_labels):
            val = model.labeling_value(lab)
            if best is None or val > best:
                best, arg = val, lab
        return best, tuple(arg)
    grid, values = _all_values(model)
    k = int(np.argmax(values))
    return float(values[k]), tuple(int(v) for v in grid[:, k])


def brute_force_max_marginal(model, feature):
    """Best labeling value among those activating ``feature``."""
    if len(feature) == 2:
        v, x = feature
        def active(lab):
            return lab[v] == x
    else:
        i, j, x, y = feature
        if (i, j) not in model.pairwise:
            raise KeyError(f"no edge ({i}, {j})")
        def active(lab):
            return lab[i] == x and lab[j] == y
    best = None
    for lab in labelings(model.n_nodes, model.n_labels):
        if active(lab):
            val = model.labeling_value(lab)
            if best is None or val > best:
                best = val
    if best is None:
        raise ValueError(f"no labeling activates {feature}")
    return best


def brute_force_chain(unary, pairwise, feature=None):
    """Value (or max-marginal) of a chain given as per-position tables.

    ``unary[k][x]`` for positions ``k`` and ``pairwise[k][x][y]`` between
    positions ``k`` and ``k + 1``. ``feature`` is ``("u", k, x)`` or
    ``("p", k, x, y)`` in chain coordinates.
    """
    n, L = len(unary), len(unary[0])
    best = None
    for lab in labelings(n, L):
        if feature is not None:
            if feature[0] == "u" and lab[feature[1]] != feature[2]:
                continue
            if feature[0] == "p" and (lab[feature[1]], lab[feature[1] + 1]) != tuple(feature[2:]):
                continue
        val = sum(unary[k][lab[k]] for k in range(n))
        val += sum(pairwise[k][lab[k]][lab[k + 1]] for k in range(n - 1))
        if best is None or val > best:
            best = val
    return best


def reference_lines(lines):
    """``(v*, lower, upper)`` for ``t -> max(lines)`` by checking all intersections."""
    lines = list(lines)
    slopes = [a for a, _ in lines]
    if not lines or max(slopes) <= 0 or min(slopes) >= 0:
        raise UnboundedMinimumError("minimum is not attained on a bounded set")
    candidates = set()
    for (a1, c1), (a2, c2) in itertools.combinations(lines, 2):
        if a1 != a2:
            candidates.add((c2 - c1) / (a1 - a2))

    def f(t):
        return max(a * t + c for a, c in lines)

    scored = [(f(t), t) for t in candidates]
    value = min(v for v, _ in scored)
    at_min = [t for v, t in scored if v == value]
    return value, min(at_min), max(at_min)


def reference_envelope(instance, x, j, ignore_constant=False):
    """Minimum and minimizer interval of ``x_j -> f(x)`` (or of ``g_j`` when ``ignore_constant``)."""
    from .maxaff import evaluate

    y, _ = evaluate(instance, x)
    coef = dict(instance.columns[j])
    xj = instance_value(instance, x[j])
    lines = []
    for i, yi in enumerate(y):
        a = coef.get(i, 0)
        if ignore_constant and a == 0:
            continue
        lines.append((a, yi - a * xj))
    return reference_lines(lines)


def instance_value(instance, v):
    from ._numeric import converter

    return converter(instance.mode)(v)


def brute_force_chain_all(unary, pairwise):
    """Value and every max-marginal of a chain in one enumeration pass.

    Returns ``(value, marginals)`` with keys ``("u", k, x)`` and
    ``("p", k, x, y)`` as in :func:`brute_force_chain`.
    """
    n, L = len(unary), len(unary[0])
    marginals = {}
    best = None
    for lab in labelings(n, L):
        val = sum(unary[k][lab[k]] for k in range(n))
        val += sum(pairwise[k][lab[k]][lab[k + 1]] for k in range(n - 1))
        if best is None or val > best:
            best = val
        keys = [("u", k, lab[k]) for k in range(n)]
        keys += [("p", k, lab[k], lab[k + 1]) for k in range(n - 1)]
        for key in keys:
            if key not in marginals or val > marginals[key]:
                marginals[key] = val
    return best, marginals
