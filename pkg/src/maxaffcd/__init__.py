"""Coordinate descent on pointwise maxima of affine functions and its MAP-inference instances."""
from ._numeric import NumericMode
from .decomposition import (
    ChainSubproblem,
    DecomposedModel,
    build_rows_cols_decomposition,
    chain_max_marginal,
    chain_value,
    mma_residual,
    mma_update,
    run_mma,
)
from .energy import SlopeBounds, certify_step, energy, slopes
from .maxaff import (
    MaxAffInstance,
    RunReport,
    Verdict,
    apply_update,
    check_sign_consistency,
    coordinate_minimizer,
    evaluate,
    fixed_point_residual,
    prune,
    run,
)
from .midpoint import minimizer_interval, run_midpoint, verify_cycle_instance
from .mrf import (
    PairwiseModel,
    bound_u1,
    bound_u2,
    diffusion_residual,
    diffusion_update,
    encode_to_maxaff,
    reparameterize,
    run_diffusion,
)

__version__ = "0.1.0"

_ESTIMATORS = ("MaxAffineCD", "MaxMarginalAveraging", "MaxSumDiffusion", "MidpointCD")


def __getattr__(name):
    # scikit-learn is heavy to import; load the estimator layer on first use
    if name in _ESTIMATORS:
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "NumericMode", "ChainSubproblem", "DecomposedModel", "build_rows_cols_decomposition",
    "chain_max_marginal", "chain_value", "mma_residual", "mma_update", "run_mma",
    "SlopeBounds", "certify_step", "energy", "slopes",
    "MaxAffineCD", "MaxMarginalAveraging", "MaxSumDiffusion", "MidpointCD",
    "MaxAffInstance", "RunReport", "Verdict", "apply_update", "check_sign_consistency",
    "coordinate_minimizer", "evaluate", "fixed_point_residual", "prune", "run",
    "minimizer_interval", "run_midpoint", "verify_cycle_instance",
    "PairwiseModel", "bound_u1", "bound_u2", "diffusion_residual", "diffusion_update",
    "encode_to_maxaff", "reparameterize", "run_diffusion",
]
