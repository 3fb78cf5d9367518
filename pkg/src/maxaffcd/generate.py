"""Seeded random instances."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from ._numeric import NumericMode
from .maxaff import MaxAffInstance, prune
from .mrf import PairwiseModel

_MAX_REDRAWS = 100


def generate_maxaff(m, n, density=0.3, coeffs=(-1, 1), offsets=(-10, 10), seed=0,
                    mode="float") -> MaxAffInstance:
    """Sparse instance with integer data, pruned to sign consistency.

    ``coeffs`` is the set nonzero coefficients are drawn from and
    ``offsets`` an inclusive integer range. Draws are repeated from the
    same generator until something survives pruning.
    """
    if m < 2 or n < 1 or not 0 < density <= 1:
        raise ValueError("need m >= 2, n >= 1 and 0 < density <= 1")
    coeffs = [int(a) for a in coeffs if a != 0]
    if not any(a > 0 for a in coeffs) or not any(a < 0 for a in coeffs):
        raise ValueError("coefficient set needs both signs")
    rng = np.random.default_rng(seed)
    num = Fraction if NumericMode.coerce(mode) is NumericMode.EXACT else float
    for _ in range(_MAX_REDRAWS):
        rows = []
        for _ in range(m):
            mask = rng.random(n) < density
            terms = [(int(j), num(int(rng.choice(coeffs)))) for j in np.flatnonzero(mask)]
            rows.append((num(int(rng.integers(offsets[0], offsets[1] + 1))), terms))
        inst = MaxAffInstance.from_rows(rows, n=n, mode=mode)
        pr = prune(inst)
        if pr.instance is not None:
            return pr.instance
    raise ValueError("parameters never produced a sign-consistent instance")


def _table(rng, shape, low, high, integer, exact):
    if integer:
        vals = rng.integers(int(low), int(high) + 1, size=shape)
        conv = Fraction if exact else float
        return [[conv(int(v)) for v in row] for row in np.atleast_2d(vals)]
    vals = rng.uniform(low, high, size=shape)
    return [[float(v) for v in row] for row in np.atleast_2d(vals)]


def generate_model(n_nodes, n_labels, edges, weight_range=(-1.0, 1.0), seed=0,
                   integer=False, exact=False) -> PairwiseModel:
    rng = np.random.default_rng(seed)
    low, high = weight_range
    unary = [_table(rng, (1, n_labels), low, high, integer, exact)[0] for _ in range(n_nodes)]
    pairwise = {e: _table(rng, (n_labels, n_labels), low, high, integer, exact) for e in edges}
    return PairwiseModel.build(n_nodes, n_labels, unary, pairwise)


def grid_edges(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return sorted(edges)


def generate_grid(rows, cols, n_labels, weight_range=(-1.0, 1.0), seed=0,
                  integer=False, exact=False) -> PairwiseModel:
    """Row-major ``rows x cols`` grid with uniform random weights."""
    if rows < 1 or cols < 1 or n_labels < 1:
        raise ValueError("grid dimensions and label count must be positive")
    if weight_range[0] > weight_range[1]:
        raise ValueError("empty weight range")
    return generate_model(rows * cols, n_labels, grid_edges(rows, cols), weight_range,
                          seed, integer, exact)


def generate_random_graph(n_nodes, n_labels, edge_prob=0.5, weight_range=(-1.0, 1.0),
                          seed=0, integer=False) -> PairwiseModel:
    rng = np.random.default_rng(seed)
    edges = [
        (i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)
        if rng.random() < edge_prob
    ]
    return generate_model(n_nodes, n_labels, edges, weight_range,
                          int(rng.integers(2**32)), integer)
