"""Conditioning of discrete Lyapunov (Stein) equation solutions.

Solvers for ``P - A P A^* = B B^*``, input-normal transformations, analytic
lower bounds on ``kappa(P)`` and the Monte Carlo ensembles used to study it.
"""

from .core import (
    CompanionSpec,
    ControllabilityError,
    ConvergenceError,
    EnsembleSpec,
    InputPair,
    RejectionLimitError,
    SampleRecord,
    Spectrum,
    StabilityError,
    SteinError,
    build_companion,
    build_jordan,
    charpoly_from_spectrum,
    controllability_check,
    sample_companion,
    sample_generic,
    sample_normal_diag,
    sample_stream,
)
from .stein import (
    SteinSolution,
    cond_from_factor,
    solve_stein,
    solve_stein_direct,
    solve_stein_sqrt_doubling,
    stein_residual,
)
from .normal_form import (
    InTransform,
    bilinear_transform,
    cayley,
    in_complete,
    to_input_normal,
    verify_power_identity,
)
from .bounds import BoundReport, bound_report
from .lab import build_table, emit_table, quantiles, run_ensemble

__version__ = "0.1.0"
