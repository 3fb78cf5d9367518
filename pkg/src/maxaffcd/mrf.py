"""Pairwise MRF MAP models, reparameterization, and max-sum diffusion."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from ._numeric import is_finite
from .maxaff import MaxAffInstance, Verdict


@dataclass(frozen=True)
class PairwiseModel:
    """Unary weights ``unary[i][x]`` and pairwise weights ``pairwise[(i, j)][x][y]``.

    Each edge is stored once with ``i < j``; ``x`` is the label of ``i``.
    Weights can be floats or Fractions.
    """

    n_nodes: int
    n_labels: int
    unary: tuple
    pairwise: dict
    neighbors: tuple = field(repr=False, default=())

    @classmethod
    def build(cls, n_nodes, n_labels, unary=None, pairwise=None) -> "PairwiseModel":
        if n_nodes < 1 or n_labels < 1:
            raise ValueError("need at least one node and one label")
        if unary is None:
            unary = [[0.0] * n_labels for _ in range(n_nodes)]
        unary = tuple(tuple(row) for row in unary)
        if len(unary) != n_nodes or any(len(row) != n_labels for row in unary):
            raise ValueError("unary table has the wrong shape")
        edges = {}
        for (i, j), mat in (pairwise or {}).items():
            i, j = int(i), int(j)
            if i == j or not (0 <= i < n_nodes and 0 <= j < n_nodes):
                raise ValueError(f"bad edge ({i}, {j})")
            mat = [list(r) for r in mat]
            if len(mat) != n_labels or any(len(r) != n_labels for r in mat):
                raise ValueError(f"edge ({i}, {j}) table has the wrong shape")
            if i > j:
                i, j = j, i
                mat = [list(col) for col in zip(*mat)]
            if (i, j) in edges:
                raise ValueError(f"duplicate edge ({i}, {j})")
            edges[(i, j)] = tuple(tuple(r) for r in mat)
        values = [v for row in unary for v in row]
        values += [v for mat in edges.values() for r in mat for v in r]
        if not all(is_finite(v) for v in values):
            raise ValueError("weights must be finite")
        nbrs = [[] for _ in range(n_nodes)]
        for i, j in edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return cls(
            n_nodes, n_labels, unary, dict(sorted(edges.items())),
            tuple(tuple(sorted(nb)) for nb in nbrs),
        )

    @property
    def edges(self):
        return list(self.pairwise)

    def pair(self, i, j, x, y):
        """``theta_{ij,xy}`` in either orientation."""
        if i < j:
            return self.pairwise[(i, j)][x][y]
        return self.pairwise[(j, i)][y][x]

    def triplets(self):
        """The message index set, in canonical order (i, then j, then x)."""
        return [
            (i, j, x)
            for i in range(self.n_nodes)
            for j in self.neighbors[i]
            for x in range(self.n_labels)
        ]

    def labeling_value(self, labeling):
        total = sum(self.unary[i][x] for i, x in enumerate(labeling))
        for (i, j), mat in self.pairwise.items():
            total += mat[labeling[i]][labeling[j]]
        return total

    def map_value(self):
        from .oracle import brute_force_map

        return brute_force_map(self)[0]


def zero_messages(model: PairwiseModel, zero=0.0) -> dict:
    return {t: zero for t in model.triplets()}


def _check_messages(model, delta):
    if set(delta) != set(model.triplets()):
        raise KeyError("messages are not indexed by the model's triplet set")


def reparameterize(model: PairwiseModel, delta) -> PairwiseModel:
    """Model with weights shifted by ``delta``; every labeling keeps its value."""
    _check_messages(model, delta)
    unary = [list(row) for row in model.unary]
    for (i, j, x), d in delta.items():
        unary[i][x] -= d
    pairwise = {}
    for (i, j), mat in model.pairwise.items():
        pairwise[(i, j)] = [
            [mat[x][y] + delta[(i, j, x)] + delta[(j, i, y)] for y in range(model.n_labels)]
            for x in range(model.n_labels)
        ]
    return PairwiseModel.build(model.n_nodes, model.n_labels, unary, pairwise)


def bound_u1(model: PairwiseModel):
    total = sum(max(row) for row in model.unary)
    return total + sum(max(max(r) for r in mat) for mat in model.pairwise.values())


def bound_u2(model: PairwiseModel):
    best = max(max(row) for row in model.unary)
    for mat in model.pairwise.values():
        best = max(best, max(max(r) for r in mat))
    return best


def boundedness_witness(model: PairwiseModel):
    """``|L| * sum of unary weights + sum of pairwise weights``.

    Moving ``delta_{ij,x}`` by ``d`` lowers one unary weight by ``d`` and
    raises ``|L|`` pairwise weights by ``d``, so this positive combination
    of the weights does not depend on the messages.
    """
    L = model.n_labels
    total = L * sum(v for row in model.unary for v in row)
    return total + sum(v for mat in model.pairwise.values() for r in mat for v in r)


def triplet_sum_witness(model: PairwiseModel):
    """``sum over triplets (i,j,x) of |L| theta_{i,x} + sum_y theta_{ij,xy}``.

    Counts each unary weight ``|N_i|`` times and each pairwise weight
    twice, so it is message independent only when every node has exactly
    two neighbours (it then equals twice :func:`boundedness_witness`).
    """
    L = model.n_labels
    return sum(
        L * model.unary[i][x] + sum(model.pair(i, j, x, y) for y in range(L))
        for i, j, x in model.triplets()
    )


class DiffusionState:
    """Reparameterized weights maintained incrementally alongside the messages."""

    def __init__(self, model: PairwiseModel, delta=None):
        self.model = model
        if delta is None:
            zero = model.unary[0][0] * 0
            delta = zero_messages(model, zero)
        _check_messages(model, delta)
        self.delta = dict(delta)
        rep = reparameterize(model, self.delta)
        self.unary = [list(r) for r in rep.unary]
        self.pairwise = {e: [list(r) for r in m] for e, m in rep.pairwise.items()}

    def pair_row(self, i, j, x):
        L = self.model.n_labels
        if i < j:
            return self.pairwise[(i, j)][x]
        mat = self.pairwise[(j, i)]
        return [mat[y][x] for y in range(L)]

    def shift(self, i, j, x, d):
        self.delta[(i, j, x)] += d
        self.unary[i][x] -= d
        if i < j:
            row = self.pairwise[(i, j)][x]
            for y in range(len(row)):
                row[y] += d
        else:
            for r in self.pairwise[(j, i)]:
                r[x] += d

    def as_model(self) -> PairwiseModel:
        return PairwiseModel.build(
            self.model.n_nodes, self.model.n_labels, self.unary, self.pairwise
        )

    def u2(self):
        best = max(max(row) for row in self.unary)
        for mat in self.pairwise.values():
            best = max(best, max(max(r) for r in mat))
        return best


def diffusion_step(state: DiffusionState, triplet):
    """Step that equalizes ``theta_{i,x}`` with the best pairwise weight in row ``x``."""
    i, j, x = triplet
    return (state.unary[i][x] - max(state.pair_row(i, j, x))) / 2


def diffusion_update(state: DiffusionState, triplet):
    """Apply one diffusion update in place and return the step ``d``."""
    if triplet not in state.delta:
        raise KeyError(f"{triplet} is not a triplet of the model")
    d = diffusion_step(state, triplet)
    state.shift(*triplet, d)
    return d


def diffusion_residual(model: PairwiseModel, delta):
    state = DiffusionState(model, delta)
    return max(
        (abs(state.unary[i][x] - max(state.pair_row(i, j, x))) for i, j, x in model.triplets()),
        default=0,
    )


@dataclass
class DiffusionReport:
    verdict: Verdict
    delta: dict
    sweeps: int
    eta: object
    objective: object
    updates: int = 0
    steps: list = field(default_factory=list)
    trace: list = field(default_factory=list)


def run_diffusion(
    model: PairwiseModel,
    delta0=None,
    eps=1e-9,
    max_sweeps: int = 10000,
    order="cyclic",
    seed=None,
    record_steps: bool = False,
    trace: bool = False,
    callback=None,
) -> DiffusionReport:
    """Sweep the triplets until the largest step in a sweep is below ``eps``.

    ``callback(state, triplet, d)`` is invoked after every update.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be a positive integer")
    state = DiffusionState(model, delta0)
    triplets = model.triplets()
    if order == "shuffle":
        random.Random(seed).shuffle(triplets)
    elif order not in (None, "cyclic"):
        triplets = [tuple(t) for t in order]
        if sorted(triplets) != sorted(model.triplets()):
            raise ValueError("order is not a permutation of the triplets")
    zero = model.unary[0][0] * 0
    steps, rows = [], []
    sweeps = updates = 0
    eta = zero
    verdict = Verdict.MAX_SWEEPS
    while sweeps < max_sweeps:
        sweeps += 1
        eta = zero
        for t in triplets:
            d = diffusion_update(state, t)
            updates += 1
            if abs(d) > eta:
                eta = abs(d)
            if record_steps:
                steps.append(d)
            if trace:
                rows.append((sweeps, updates, t, d, eta, state.u2()))
            if callback is not None:
                callback(state, t, d)
        if eta < eps:
            verdict = Verdict.CONVERGED
            break
    return DiffusionReport(
        verdict, state.delta, sweeps, eta, state.u2(), updates, steps, rows
    )


@dataclass(frozen=True)
class DiffusionEncoding:
    instance: MaxAffInstance
    variables: tuple  # column -> triplet
    unary_rows: dict  # (i, x) -> row
    pair_rows: dict  # (i, j, x, y) with i < j -> row


def encode_to_maxaff(model: PairwiseModel, mode="float", order=None) -> DiffusionEncoding:
    """``delta -> U2(theta^delta)`` written as a max of affine functions.

    Columns follow ``order`` (default: canonical triplet order), so
    coordinate descent over columns mirrors a diffusion sweep.
    """
    variables = tuple(model.triplets() if order is None else order)
    col = {t: k for k, t in enumerate(variables)}
    rows = []
    unary_rows, pair_rows = {}, {}
    for i in range(model.n_nodes):
        for x in range(model.n_labels):
            unary_rows[(i, x)] = len(rows)
            rows.append((model.unary[i][x], [(col[(i, j, x)], -1) for j in model.neighbors[i]]))
    for (i, j), mat in model.pairwise.items():
        for x in range(model.n_labels):
            for y in range(model.n_labels):
                pair_rows[(i, j, x, y)] = len(rows)
                rows.append((mat[x][y], [(col[(i, j, x)], 1), (col[(j, i, y)], 1)]))
    inst = MaxAffInstance.from_rows(rows, n=len(variables), mode=mode)
    return DiffusionEncoding(inst, variables, unary_rows, pair_rows)
