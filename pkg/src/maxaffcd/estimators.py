"""Estimator-style wrappers around the solvers.

They follow the scikit-learn conventions: hyperparameters in
``__init__``, ``fit`` returns ``self``, results live in attributes with a
trailing underscore, and ``get_params``/``set_params`` come from
:class:`sklearn.base.BaseEstimator`.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import decomposition as dec
from . import maxaff, midpoint, mrf
from .validation import check_eps, check_fitted, check_instance, check_model, check_order


class MaxAffineCD(BaseEstimator):
    """Coordinate descent minimizing ``max_i (a_i . x + b_i)``.

    Parameters
    ----------
    eps : float
        Stop after a sweep whose largest coordinate step is below ``eps``.
    max_sweeps : int
    order : {"cyclic", "shuffle"} or sequence of int
        Variable order, fixed across sweeps. ``"shuffle"`` draws one
        permutation from ``random_state``.
    rule : {"ignore-constant", "midpoint"}
    exact : bool
        Run in rational arithmetic.
    certify : bool
        Record the energy decrease of every update (exact mode only).
    """

    def __init__(self, eps=1e-9, max_sweeps=10000, order="cyclic", rule="ignore-constant",
                 exact=False, certify=False, divergence_budget=None, detect_drift=True,
                 random_state=None):
        self.eps = eps
        self.max_sweeps = max_sweeps
        self.order = order
        self.rule = rule
        self.exact = exact
        self.certify = certify
        self.divergence_budget = divergence_budget
        self.detect_drift = detect_drift
        self.random_state = random_state

    def fit(self, X, b=None, x0=None):
        check_eps(self.eps, self.max_sweeps)
        check_order(self.order)
        if self.certify and not self.exact:
            raise ValueError("certify requires exact=True")
        instance = check_instance(X, b, mode="exact" if self.exact else None)
        report = maxaff.run(
            instance, x0, eps=self.eps, max_sweeps=self.max_sweeps, order=self.order,
            seed=self.random_state, divergence_budget=self.divergence_budget,
            detect_drift=self.detect_drift, certify=self.certify, rule=self.rule,
        )
        self.instance_ = instance
        self.report_ = report
        self.x_ = report.x
        self.values_ = report.y
        self.objective_ = report.objective
        self.verdict_ = report.verdict
        self.n_sweeps_ = report.sweeps
        self.n_updates_ = report.updates
        self.eta_ = report.eta
        self.energy_ledger_ = report.energy_ledger
        return self

    def evaluate(self, points):
        """Objective at each row of ``points`` (for the fitted instance)."""
        check_fitted(self, "instance_")
        pts = np.atleast_2d(points) if not self.exact else [list(p) for p in points]
        return [maxaff.evaluate(self.instance_, p)[1] for p in pts]


class MidpointCD(BaseEstimator):
    """Cyclic coordinate descent with the mid-point rule, exact arithmetic."""

    def __init__(self, max_updates=1000):
        self.max_updates = max_updates

    def fit(self, X, b=None, x0=None):
        instance = check_instance(X, b, mode="exact")
        traj = midpoint.run_midpoint(instance, x0, max_updates=self.max_updates)
        self.instance_ = instance
        self.trajectory_ = traj.iterates
        self.period_ = traj.period
        self.converged_ = traj.fixed
        self.x_ = list(traj.iterates[-1])
        return self


class MaxSumDiffusion(TransformerMixin, BaseEstimator):
    """Max-sum diffusion on a pairwise model.

    ``transform`` returns the reparameterized model for the fitted messages.
    """

    def __init__(self, eps=1e-9, max_sweeps=10000, order="cyclic", random_state=None):
        self.eps = eps
        self.max_sweeps = max_sweeps
        self.order = order
        self.random_state = random_state

    def fit(self, model, y=None, messages=None):
        check_eps(self.eps, self.max_sweeps)
        model = check_model(model)
        report = mrf.run_diffusion(model, messages, eps=self.eps, max_sweeps=self.max_sweeps,
                                   order=self.order, seed=self.random_state)
        self.model_ = model
        self.messages_ = report.delta
        self.bound_ = report.objective
        self.verdict_ = report.verdict
        self.n_sweeps_ = report.sweeps
        self.eta_ = report.eta
        return self

    def transform(self, model):
        check_fitted(self, "messages_")
        return mrf.reparameterize(check_model(model), self.messages_)

    def upper_bounds(self):
        """``(U1, (|V|+|E|) * U2)`` at the fitted messages."""
        check_fitted(self, "messages_")
        rep = self.transform(self.model_)
        n_terms = rep.n_nodes + len(rep.pairwise)
        return mrf.bound_u1(rep), n_terms * mrf.bound_u2(rep)


class MaxMarginalAveraging(BaseEstimator):
    """Pairwise max-marginal averaging over a chain decomposition.

    ``decomposition="rows-cols"`` needs a grid model; otherwise pass the
    chains explicitly through ``chains``.
    """

    def __init__(self, eps=1e-9, max_sweeps=10000, decomposition="rows-cols", chains=None,
                 order="cyclic", random_state=None):
        self.eps = eps
        self.max_sweeps = max_sweeps
        self.decomposition = decomposition
        self.chains = chains
        self.order = order
        self.random_state = random_state

    def fit(self, model, y=None):
        check_eps(self.eps, self.max_sweeps)
        model = check_model(model)
        if self.chains is not None:
            decomp = dec.DecomposedModel.from_chains(model, self.chains)
        elif self.decomposition == "rows-cols":
            decomp = dec.build_rows_cols_decomposition(model)
        else:
            raise ValueError(f"unknown decomposition {self.decomposition!r}")
        report = dec.run_mma(decomp, eps=self.eps, max_sweeps=self.max_sweeps,
                             order=self.order, seed=self.random_state)
        self.decomposition_ = decomp
        self.messages_ = report.delta
        self.subproblems_ = report.subproblems
        values = [dec.chain_value(s) for s in report.subproblems]
        self.sum_bound_ = sum(values)
        self.bound_ = len(values) * max(values)
        self.verdict_ = report.verdict
        self.n_sweeps_ = report.sweeps
        self.eta_ = report.eta
        return self
