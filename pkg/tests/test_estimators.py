from fractions import Fraction as F

import numpy as np
import pytest
from scipy import sparse
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import maxaffcd
from maxaffcd import MaxAffineCD, MaxMarginalAveraging, MaxSumDiffusion, MidpointCD
from maxaffcd.generate import generate_grid
from maxaffcd.maxaff import Verdict
from maxaffcd.midpoint import cycle_instance

A_PLANES = [[1, 0], [0, 1], [-1, -1]]
B_PLANES = [0, 0, 0]


class TestMaxAffineCD:
    def test_params_and_clone(self):
        est = MaxAffineCD(eps=1e-6, order="shuffle", random_state=3)
        params = est.get_params()
        assert params["eps"] == 1e-6 and params["random_state"] == 3
        twin = clone(est)
        assert twin.get_params() == params and twin is not est
        est.set_params(max_sweeps=5)
        assert est.max_sweeps == 5

    def test_fit_dense(self):
        est = MaxAffineCD().fit(A_PLANES, B_PLANES, x0=[1, 1])
        assert est.verdict_ is Verdict.CONVERGED
        assert np.max(np.abs(est.x_)) <= 1e-8 and est.objective_ <= 1e-8
        assert est.n_sweeps_ > 0 and len(est.values_) == 3

    def test_fit_sparse_matches_dense(self):
        a = MaxAffineCD().fit(sparse.csr_matrix(np.array(A_PLANES, dtype=float)), B_PLANES, x0=[1, 1])
        b = MaxAffineCD().fit(A_PLANES, B_PLANES, x0=[1, 1])
        assert a.x_ == b.x_

    def test_exact_certified(self, drift_planes):
        est = MaxAffineCD(exact=True, certify=True, max_sweeps=20).fit(drift_planes, x0=[0, 0, 0])
        assert est.verdict_ is Verdict.DIVERGING
        assert est.energy_ledger_ and all(row.passed for row in est.energy_ledger_)
        assert all(isinstance(v, F) for v in est.x_)

    def test_evaluate(self):
        est = MaxAffineCD().fit(A_PLANES, B_PLANES, x0=[1, 1])
        assert est.evaluate([[1, 1], [2, -5]]) == [1, 3]

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            MaxAffineCD().evaluate([[0, 0]])

    @pytest.mark.parametrize("kwargs", [
        {"eps": -1}, {"max_sweeps": 0}, {"order": "zigzag"}, {"certify": True},
    ])
    def test_bad_params(self, kwargs):
        with pytest.raises(ValueError):
            MaxAffineCD(**kwargs).fit(A_PLANES, B_PLANES)

    def test_bad_input(self):
        with pytest.raises(ValueError):
            MaxAffineCD().fit(A_PLANES, [0, 0])
        with pytest.raises(ValueError):
            MaxAffineCD().fit([[1, np.inf], [0, 1]], [0, 0])
        with pytest.raises(ValueError):
            MaxAffineCD().fit(A_PLANES)


class TestMidpointCD:
    def test_cycle(self):
        est = MidpointCD(max_updates=50).fit(cycle_instance(), x0=[0, 0, 0])
        assert est.period_ == 6 and not est.converged_

    def test_fixed(self):
        est = MidpointCD().fit([[1, 0], [-1, 0], [0, 1], [0, -1]], [0] * 4, x0=[3, 5])
        assert est.converged_ and est.x_ == [0, 0]


class TestMaxSumDiffusion:
    def test_fit_transform(self, potts):
        est = MaxSumDiffusion(eps=1e-10)
        rep = est.fit_transform(potts)
        assert est.verdict_ is Verdict.CONVERGED
        assert est.bound_ == pytest.approx(4 / 3)
        u1, scaled_u2 = est.upper_bounds()
        assert 4 - 1e-9 <= u1 <= scaled_u2 + 1e-9
        assert rep.labeling_value((1, 1)) == pytest.approx(4)

    def test_clone_and_type_check(self):
        est = clone(MaxSumDiffusion(order="shuffle", random_state=1))
        assert est.order == "shuffle"
        with pytest.raises(TypeError):
            est.fit([[1, 2]])

    def test_not_fitted(self, potts):
        with pytest.raises(NotFittedError):
            MaxSumDiffusion().transform(potts)


class TestMaxMarginalAveraging:
    def test_grid(self):
        model = generate_grid(2, 3, 2, seed=4)
        est = MaxMarginalAveraging(eps=1e-8).fit(model)
        assert len(est.subproblems_) == 5
        assert est.sum_bound_ <= est.bound_ + 1e-12
        assert est.verdict_ is Verdict.CONVERGED

    def test_explicit_chains(self, potts):
        est = MaxMarginalAveraging(chains=[[0, 1], [0], [1]]).fit(potts)
        assert est.sum_bound_ >= 4 - 1e-9

    def test_unknown_decomposition(self, potts):
        with pytest.raises(ValueError):
            MaxMarginalAveraging(decomposition="trees").fit(potts)


def test_lazy_exports():
    assert maxaffcd.MaxAffineCD is MaxAffineCD
    with pytest.raises(AttributeError):
        maxaffcd.NoSuchThing
