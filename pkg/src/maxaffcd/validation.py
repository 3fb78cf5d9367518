"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

import numbers

import numpy as np

from ._numeric import NumericMode
from .maxaff import MaxAffInstance
from .mrf import PairwiseModel


def check_instance(X, b=None, mode=None) -> MaxAffInstance:
    """Coerce ``X`` (and offsets ``b``) into a :class:`MaxAffInstance`.

    Accepts an instance, a dense array-like or scipy sparse coefficient
    matrix together with ``b``, or a mapping in the JSON instance layout.
    """
    if isinstance(X, MaxAffInstance):
        if b is not None:
            raise ValueError("offsets are part of the instance; do not pass b")
        return X if mode is None else X.with_mode(mode)
    mode = NumericMode.FLOAT if mode is None else NumericMode.coerce(mode)
    if isinstance(X, dict):
        return MaxAffInstance.from_rows(
            [(row["b"], row["terms"]) for row in X["rows"]], n=X["n"], mode=mode
        )
    if b is None:
        raise ValueError("offsets b are required with a coefficient matrix")
    if hasattr(X, "tocsr"):
        csr = X.tocsr()
        csr.eliminate_zeros()
        rows = []
        for i in range(csr.shape[0]):
            lo, hi = csr.indptr[i], csr.indptr[i + 1]
            rows.append((b[i], [(int(j), a.item()) for j, a in zip(csr.indices[lo:hi], csr.data[lo:hi])]))
        return MaxAffInstance.from_rows(rows, n=csr.shape[1], mode=mode)
    if mode is NumericMode.FLOAT:
        A = np.asarray(X, dtype=float)
        if A.ndim != 2:
            raise ValueError(f"expected a 2-D coefficient matrix, got {A.ndim}-D")
        if not np.all(np.isfinite(A)):
            raise ValueError("coefficients must be finite")
        b = np.asarray(b, dtype=float).ravel()
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"b has {b.shape[0]} entries for {A.shape[0]} rows")
        return MaxAffInstance.from_dense(A.tolist(), b.tolist(), mode=mode)
    return MaxAffInstance.from_dense(X, list(b), mode=mode)


def check_model(model) -> PairwiseModel:
    if not isinstance(model, PairwiseModel):
        raise TypeError(f"expected a PairwiseModel, got {type(model).__name__}")
    return model


def check_eps(eps, max_sweeps):
    if not isinstance(eps, (numbers.Real, str)) or float(eps) < 0:
        raise ValueError(f"eps must be a non-negative number, got {eps!r}")
    if not isinstance(max_sweeps, numbers.Integral) or max_sweeps < 1:
        raise ValueError(f"max_sweeps must be a positive integer, got {max_sweeps!r}")
    return eps, int(max_sweeps)


def check_order(order):
    if isinstance(order, str) and order not in ("cyclic", "shuffle"):
        raise ValueError(f"order must be 'cyclic', 'shuffle' or a permutation, got {order!r}")
    return order


def check_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        from sklearn.exceptions import NotFittedError

        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call 'fit' first."
        )
