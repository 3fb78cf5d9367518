"""Lagrangian decomposition into chains and pairwise max-marginal averaging.

Features are ``(v, x)`` for node ``v`` taking label ``x`` and
``(i, j, x, y)`` (with ``i < j``) for an edge taking the label pair
``(x, y)``. Each subproblem is a chain of nodes and owns the unary
features of its nodes and the pairwise features of consecutive nodes.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .maxaff import MaxAffInstance, Verdict
from .mrf import PairwiseModel


class ChainSubproblem:
    """A chain ``nodes[0] - nodes[1] - ...`` with its own weight tables.

    ``pairwise[k][x][y]`` couples position ``k`` (label ``x``) with
    position ``k + 1`` (label ``y``).
    """

    def __init__(self, nodes, unary, pairwise):
        self.nodes = tuple(nodes)
        self.unary = [list(r) for r in unary]
        self.pairwise = [[list(r) for r in m] for m in pairwise]
        if not self.nodes:
            raise ValueError("empty chain")
        if len(self.unary) != len(self.nodes) or len(self.pairwise) != len(self.nodes) - 1:
            raise ValueError("chain tables do not match its length")
        self.position = {v: k for k, v in enumerate(self.nodes)}
        self.edge_position = {}
        for k in range(len(self.nodes) - 1):
            a, b = self.nodes[k], self.nodes[k + 1]
            self.edge_position[(min(a, b), max(a, b))] = (k, a > b)

    @property
    def n_labels(self):
        return len(self.unary[0])

    def copy(self) -> "ChainSubproblem":
        return ChainSubproblem(self.nodes, self.unary, self.pairwise)

    def features(self):
        L = self.n_labels
        out = [(v, x) for v in self.nodes for x in range(L)]
        for (i, j) in self.edge_position:
            out += [(i, j, x, y) for x in range(L) for y in range(L)]
        return out

    def __contains__(self, feature):
        if len(feature) == 2:
            return feature[0] in self.position
        return (feature[0], feature[1]) in self.edge_position

    def get(self, feature):
        if len(feature) == 2:
            v, x = feature
            return self.unary[self.position[v]][x]
        i, j, x, y = feature
        k, flipped = self.edge_position[(i, j)]
        return self.pairwise[k][y][x] if flipped else self.pairwise[k][x][y]

    def add(self, feature, d):
        if len(feature) == 2:
            v, x = feature
            self.unary[self.position[v]][x] += d
            return
        i, j, x, y = feature
        k, flipped = self.edge_position[(i, j)]
        if flipped:
            self.pairwise[k][y][x] += d
        else:
            self.pairwise[k][x][y] += d

    def forward(self):
        L = self.n_labels
        alpha = [list(self.unary[0])]
        for k in range(1, len(self.nodes)):
            prev, pw = alpha[-1], self.pairwise[k - 1]
            alpha.append([
                self.unary[k][y] + max(prev[x] + pw[x][y] for x in range(L))
                for y in range(L)
            ])
        return alpha

    def backward(self):
        """``beta[k][x]``: best value of positions after ``k`` given label ``x`` at ``k``."""
        L = self.n_labels
        n = len(self.nodes)
        zero = self.unary[0][0] * 0
        beta = [None] * n
        beta[-1] = [zero] * L
        for k in range(n - 2, -1, -1):
            nxt, pw = beta[k + 1], self.pairwise[k]
            beta[k] = [
                max(pw[x][y] + self.unary[k + 1][y] + nxt[y] for y in range(L))
                for x in range(L)
            ]
        return beta

    def labeling_value(self, labels):
        """Value of a labeling of the chain positions (labels in chain order)."""
        total = sum(self.unary[k][x] for k, x in enumerate(labels))
        return total + sum(
            self.pairwise[k][labels[k]][labels[k + 1]] for k in range(len(labels) - 1)
        )


def chain_value(sub: ChainSubproblem):
    """Best labeling value of the chain, by a forward max-sum pass."""
    return max(sub.forward()[-1])


def chain_max_marginal(sub: ChainSubproblem, feature, alpha=None, beta=None):
    """Best labeling value among those activating ``feature``."""
    if feature not in sub:
        raise KeyError(f"{feature} is not a feature of this chain")
    alpha = sub.forward() if alpha is None else alpha
    beta = sub.backward() if beta is None else beta
    if len(feature) == 2:
        v, x = feature
        k = sub.position[v]
        return alpha[k][x] + beta[k][x]
    i, j, x, y = feature
    k, flipped = sub.edge_position[(i, j)]
    if flipped:
        x, y = y, x
    return alpha[k][x] + sub.pairwise[k][x][y] + sub.unary[k + 1][y] + beta[k + 1][y]


def chain_argmax(sub: ChainSubproblem):
    """Optimal chain labeling; ties go to the smallest label."""
    alpha, beta = sub.forward(), sub.backward()
    L = sub.n_labels
    labels = []
    for k in range(len(sub.nodes)):
        if k == 0:
            scores = [alpha[0][x] + beta[0][x] for x in range(L)]
        else:
            prev = labels[-1]
            scores = [
                alpha[k - 1][prev] + sub.pairwise[k - 1][prev][x] + sub.unary[k][x] + beta[k][x]
                for x in range(L)
            ]
        labels.append(max(range(L), key=lambda x: (scores[x], -x)))
    return labels


@dataclass
class DecomposedModel:
    model: PairwiseModel
    subproblems: list
    members: dict  # feature -> sorted subproblem ids containing it
    averaging_edges: dict  # feature -> [(s, t), ...] for features shared by >= 2 chains

    @classmethod
    def from_chains(cls, model: PairwiseModel, chains) -> "DecomposedModel":
        """Split ``model`` evenly over chains; every feature must be covered."""
        chains = [tuple(int(v) for v in c) for c in chains]
        L = model.n_labels
        members = {}
        for s, nodes in enumerate(chains):
            if not nodes or len(set(nodes)) != len(nodes):
                raise ValueError(f"chain {s} is empty or repeats a node")
            for v in nodes:
                if not 0 <= v < model.n_nodes:
                    raise ValueError(f"chain {s} has unknown node {v}")
                for x in range(L):
                    members.setdefault((v, x), []).append(s)
            for a, b in zip(nodes, nodes[1:]):
                e = (min(a, b), max(a, b))
                if e not in model.pairwise:
                    raise ValueError(f"chain {s} uses missing edge {e}")
                for x in range(L):
                    for y in range(L):
                        members.setdefault((*e, x, y), []).append(s)
        for v in range(model.n_nodes):
            if (v, 0) not in members:
                raise ValueError(f"node {v} is not covered by any chain")
        for e in model.pairwise:
            if (*e, 0, 0) not in members:
                raise ValueError(f"edge {e} is not covered by any chain")
        subs = []
        for s, nodes in enumerate(chains):
            unary = [
                [model.unary[v][x] / len(members[(v, x)]) for x in range(L)] for v in nodes
            ]
            pairwise = []
            for a, b in zip(nodes, nodes[1:]):
                e = (min(a, b), max(a, b))
                pairwise.append([
                    [model.pair(a, b, x, y) / len(members[(*e, *((x, y) if a < b else (y, x)))])
                     for y in range(L)]
                    for x in range(L)
                ])
            subs.append(ChainSubproblem(nodes, unary, pairwise))
        members = {f: sorted(ss) for f, ss in members.items()}
        edges = {
            f: list(zip(ss, ss[1:])) for f, ss in sorted(members.items(), key=_feature_key) if len(ss) >= 2
        }
        return cls(model, subs, members, edges)

    def message_keys(self):
        """Message index in sweep order: features canonically, then path edges."""
        return [(f, s, t) for f, es in self.averaging_edges.items() for s, t in es]

    def zero_messages(self):
        zero = self.model.unary[0][0] * 0
        return {k: zero for k in self.message_keys()}


def _feature_key(item):
    feature = item[0]
    return (len(feature), feature)


def grid_shape(model: PairwiseModel):
    """``(R, C)`` if the model's edges are exactly a row-major R x C grid."""
    V = model.n_nodes
    edges = set(model.pairwise)
    for R in range(1, V + 1):
        if V % R:
            continue
        C = V // R
        grid = {(r * C + c, r * C + c + 1) for r in range(R) for c in range(C - 1)}
        grid |= {(r * C + c, (r + 1) * C + c) for r in range(R - 1) for c in range(C)}
        if grid == edges:
            return R, C
    raise ValueError("model graph is not a row-major grid")


def build_rows_cols_decomposition(model: PairwiseModel, shape=None) -> DecomposedModel:
    """One chain per grid row and per grid column (length-one lines skipped)."""
    R, C = grid_shape(model) if shape is None else shape
    if R * C != model.n_nodes:
        raise ValueError("shape does not match the node count")
    chains = []
    if C > 1 or R == 1:
        chains += [[r * C + c for c in range(C)] for r in range(R)]
    if R > 1:
        chains += [[r * C + c for r in range(R)] for c in range(C)]
    return DecomposedModel.from_chains(model, chains)


def apply_messages(decomp: DecomposedModel, delta):
    """Subproblem weights shifted by the messages; their sum is unchanged."""
    subs = [s.copy() for s in decomp.subproblems]
    for (feature, s, t), d in delta.items():
        if (s, t) not in decomp.averaging_edges.get(feature, ()):
            raise KeyError(f"message {(feature, s, t)} is not on an averaging edge")
        subs[s].add(feature, d)
        subs[t].add(feature, -d)
    return subs


class MMAState:
    def __init__(self, decomp: DecomposedModel, delta=None):
        self.decomp = decomp
        self.delta = decomp.zero_messages() if delta is None else dict(delta)
        self.subs = apply_messages(decomp, self.delta)

    def max_marginal(self, s, feature):
        return chain_max_marginal(self.subs[s], feature)

    def values(self):
        return [chain_value(sub) for sub in self.subs]

    def objective(self):
        return max(self.values())


def mma_step(state: MMAState, feature, edge):
    s, t = edge
    return (state.max_marginal(t, feature) - state.max_marginal(s, feature)) / 2


def mma_update(state: MMAState, feature, edge):
    """Equalize the max-marginals of ``feature`` in the two subproblems of ``edge``."""
    if tuple(edge) not in state.decomp.averaging_edges.get(feature, ()):
        raise KeyError(f"{edge} is not an averaging edge of {feature}")
    s, t = edge
    d = mma_step(state, feature, edge)
    state.delta[(feature, s, t)] += d
    state.subs[s].add(feature, d)
    state.subs[t].add(feature, -d)
    return d


def mma_residual(decomp: DecomposedModel, delta):
    state = MMAState(decomp, delta)
    return max(
        (
            abs(state.max_marginal(s, f) - state.max_marginal(t, f))
            for f, s, t in decomp.message_keys()
        ),
        default=0,
    )


@dataclass
class MMAReport:
    verdict: Verdict
    delta: dict
    sweeps: int
    eta: object
    objective: object
    updates: int = 0
    subproblems: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    trace: list = field(default_factory=list)


def run_mma(
    decomp: DecomposedModel,
    delta0=None,
    eps=1e-9,
    max_sweeps: int = 10000,
    order="cyclic",
    seed=None,
    record_steps: bool = False,
    trace: bool = False,
    callback=None,
) -> MMAReport:
    """Pairwise max-marginal averaging sweeps until the largest step is below ``eps``."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be a positive integer")
    state = MMAState(decomp, delta0)
    keys = decomp.message_keys()
    if order == "shuffle":
        random.Random(seed).shuffle(keys)
    elif order not in (None, "cyclic"):
        raise ValueError(f"unknown order {order!r}")
    zero = decomp.model.unary[0][0] * 0
    eta = zero
    sweeps = updates = 0
    steps, rows = [], []
    verdict = Verdict.MAX_SWEEPS
    while sweeps < max_sweeps:
        sweeps += 1
        eta = zero
        for feature, s, t in keys:
            d = mma_update(state, feature, (s, t))
            updates += 1
            if abs(d) > eta:
                eta = abs(d)
            if record_steps:
                steps.append(d)
            if trace:
                rows.append((sweeps, updates, (feature, s, t), d, eta, state.objective()))
            if callback is not None:
                callback(state, (feature, s, t), d)
        if eta < eps:
            verdict = Verdict.CONVERGED
            break
    return MMAReport(
        verdict, state.delta, sweeps, eta, state.objective(), updates,
        state.subs, steps, rows,
    )


def encode_mma_to_maxaff(decomp: DecomposedModel, mode="float"):
    """``delta -> max_s F(theta^delta_s)`` as a max over (chain, labeling) rows.

    Returns the instance and the message key of every column. Columns
    follow the sweep order of :func:`run_mma`.
    """
    keys = decomp.message_keys()
    col = {k: n for n, k in enumerate(keys)}
    by_feature = {}
    for f, s, t in keys:
        by_feature.setdefault(f, []).append((s, t))
    rows = []
    for s, sub in enumerate(decomp.subproblems):
        for labels in itertools.product(range(sub.n_labels), repeat=len(sub.nodes)):
            active = [(v, x) for v, x in zip(sub.nodes, labels)]
            for k in range(len(sub.nodes) - 1):
                a, b = sub.nodes[k], sub.nodes[k + 1]
                xa, xb = labels[k], labels[k + 1]
                active.append((a, b, xa, xb) if a < b else (b, a, xb, xa))
            terms = {}
            for f in active:
                for p, q in by_feature.get(f, ()):
                    if p == s:
                        terms[col[(f, p, q)]] = terms.get(col[(f, p, q)], 0) + 1
                    elif q == s:
                        terms[col[(f, p, q)]] = terms.get(col[(f, p, q)], 0) - 1
            rows.append((sub.labeling_value(labels), [(j, a) for j, a in terms.items() if a]))
    return MaxAffInstance.from_rows(rows, n=len(keys), mode=mode), keys
