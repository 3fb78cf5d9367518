import random
from fractions import Fraction as F

import pytest

from maxaffcd.envelope import UnboundedMinimumError
from maxaffcd.maxaff import MaxAffInstance, coordinate_minimizer, initial_state
from maxaffcd.midpoint import minimizer_interval
from maxaffcd.mrf import PairwiseModel, reparameterize
from maxaffcd.oracle import (
    MAX_LABELINGS,
    OracleSizeError,
    brute_force_chain,
    brute_force_map,
    brute_force_max_marginal,
    feature_map,
    labelings,
    reference_envelope,
    reference_lines,
)

from test_mrf import random_messages, random_model


def test_all_zero():
    model = PairwiseModel.build(3, 2, None, {(0, 1): [[0, 0], [0, 0]]})
    assert brute_force_map(model) == (0, (0, 0, 0))


def test_potts(potts):
    value, arg = brute_force_map(potts)
    assert value == 4 and tuple(arg) == (0, 0)


def test_labelings_count():
    assert len(list(labelings(3, 3))) == 27
    assert len(set(labelings(2, 4))) == 16


def test_feature_map(potts):
    assert sorted(feature_map(potts, (1, 0)), key=len) == [(0, 1), (1, 0), (0, 1, 1, 0)]


def test_size_guard():
    model = PairwiseModel.build(21, 2, None, {})
    assert 2 ** 21 > MAX_LABELINGS
    with pytest.raises(OracleSizeError):
        brute_force_map(model)
    with pytest.raises(OracleSizeError):
        brute_force_max_marginal(model, (0, 0))


def test_single_node_max_marginal():
    model = PairwiseModel.build(1, 2, [[1, 5]], {})
    assert brute_force_max_marginal(model, (0, 1)) == 5
    assert brute_force_max_marginal(model, (0, 0)) == 1


def test_max_marginal_partition(potts):
    assert max(brute_force_max_marginal(potts, (0, x)) for x in range(2)) == 4
    assert brute_force_max_marginal(potts, (0, 1, 0, 1)) == 0


def exact_copy(model):
    return PairwiseModel.build(
        model.n_nodes, model.n_labels,
        [[F(v).limit_denominator(1000) for v in row] for row in model.unary],
        {e: [[F(v).limit_denominator(1000) for v in r] for r in m] for e, m in model.pairwise.items()},
    )


@pytest.mark.parametrize("seed", range(10))
def test_map_invariant_under_messages(seed):
    model = random_model(seed)
    delta = random_messages(model, seed)
    assert brute_force_map(reparameterize(model, delta))[0] == pytest.approx(brute_force_map(model)[0])


@pytest.mark.parametrize("seed", range(5))
def test_exact_invariance_and_agreement(seed):
    model = exact_copy(random_model(seed))
    rng = random.Random(seed)
    delta = {t: F(rng.randint(-30, 30), 7) for t in model.triplets()}
    value, arg = brute_force_map(model)
    assert isinstance(value, F)
    assert brute_force_map(reparameterize(model, delta))[0] == value
    float_model = PairwiseModel.build(
        model.n_nodes, model.n_labels, [[float(v) for v in r] for r in model.unary],
        {e: [[float(v) for v in r] for r in m] for e, m in model.pairwise.items()})
    fvalue, farg = brute_force_map(float_model)
    assert fvalue == pytest.approx(float(value))
    assert model.labeling_value(farg) == value


def test_chain():
    assert brute_force_chain([[0, 1], [2, 0]], [[[0, 0], [5, 0]]]) == 8
    assert brute_force_chain([[0, 1], [2, 0]], [[[0, 0], [5, 0]]], ("u", 0, 0)) == 2


class TestEnvelope:
    def test_flat(self):
        assert reference_lines([(1, 0), (0, 1), (-1, -1)]) == (1, -2, 1)

    def test_point(self):
        assert reference_lines([(1, 0), (-1, 0)]) == (0, 0, 0)

    def test_unbounded(self):
        with pytest.raises(UnboundedMinimumError):
            reference_lines([(1, 0), (2, 1)])

    def test_on_instance(self, three_planes):
        assert reference_envelope(three_planes, [1, 1], 0) == (1, -2, 1)
        value, lo, hi = reference_envelope(three_planes, [1, 1], 0, ignore_constant=True)
        assert lo == hi == F(-1, 2)

    @pytest.mark.parametrize("seed", range(40))
    def test_agrees_with_production(self, seed):
        rng = random.Random(seed)
        rows = [(F(rng.randint(-9, 9), rng.randint(1, 3)),
                 [(0, F(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 2)))])
                for _ in range(10)]
        rows += [(0, [(0, 1)]), (0, [(0, -1)])]
        inst = MaxAffInstance.from_rows(rows, mode="exact")
        state = initial_state(inst, [F(rng.randint(-5, 5))])
        value, lo, hi = reference_envelope(inst, state.x, 0)
        iv = minimizer_interval(inst, state, 0)
        assert (iv.value, iv.lower, iv.upper) == (value, lo, hi)
        _, lo, hi = reference_envelope(inst, state.x, 0, ignore_constant=True)
        assert lo == hi == coordinate_minimizer(inst, state, 0)
