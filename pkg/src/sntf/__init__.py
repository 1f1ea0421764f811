"""Sparse nonnegative tensor completion under the t-product.

Submodules
----------
tensor_algebra      t-product, transpose, identity, inverse, norms
observation_model   Bernoulli masks, noise models, negative log-likelihood
proximal_operators  data-fit proxes, l0 hard threshold, box projection
admm_solver         seven-block ADMM with KKT residual diagnostics
theory_bounds       closed-form upper/lower error bounds and divergences
harness             synthetic instances and experiment sweeps
io                  NT3 / OBS text formats
cli                 ``sntf`` command-line entry point
"""

from .admm_solver import (
    SolveReport,
    SolverConfig,
    SolverState,
    init_state,
    kkt_residuals,
    relative_error,
    solve,
)
from .errors import NoiseModelError, NumericError, ShapeError, SingularityError
from .harness import ExperimentSpec, SweepRow, generate_instance, run_sweep
from .observation_model import (
    Gaussian,
    Laplace,
    ObservationSet,
    Poisson,
    neg_log_likelihood,
    sample_mask,
    synthesize,
)
from .proximal_operators import BoxBounds, project_box, prox_data, prox_l0
from .tensor_algebra import identity_tensor, inner, norms, tinverse, tprod, ttranspose
from .theory_bounds import BoundInputs, divergences, minimax_lower_bound, upper_bound

__version__ = "0.1.0"

__all__ = [
    "SolveReport",
    "SolverConfig",
    "SolverState",
    "init_state",
    "kkt_residuals",
    "relative_error",
    "solve",
    "NoiseModelError",
    "NumericError",
    "ShapeError",
    "SingularityError",
    "ExperimentSpec",
    "SweepRow",
    "generate_instance",
    "run_sweep",
    "Gaussian",
    "Laplace",
    "ObservationSet",
    "Poisson",
    "neg_log_likelihood",
    "sample_mask",
    "synthesize",
    "BoxBounds",
    "project_box",
    "prox_data",
    "prox_l0",
    "identity_tensor",
    "inner",
    "norms",
    "tinverse",
    "tprod",
    "ttranspose",
    "BoundInputs",
    "divergences",
    "minimax_lower_bound",
    "upper_bound",
]
