"""driftcluster: 1D finite-volume solver and verification harness for a
drift-diffusion model of individual clustering with vanishing diffusion.

The density u is advected by a screened-elliptic velocity phi, diffuses with
coefficient delta >= 0, and reproduces at rate r u E(u) under a monostable
or bistable law.  The package integrates the coupled system, machine-checks
the model's a priori estimates on every computed trajectory, and ships the
vanishing-diffusion (delta -> 0) convergence study as a first-class
experiment.
"""

__version__ = "0.1.0"

from .errors import (CflViolationError, ConfigError, DivergenceError,
                     DriftclusterError, SingularSystemError, StructuralError,
                     ValidationError)
from .grid import Grid, centered_gradient, norm_l1, norm_l2, norm_sup, total_mass
from .model import InitialCondition, Params, build_initial, reproduction_rate
from .velocity import Velocity, solve_helmholtz, solve_velocity
from .stepping import (DIAGNOSTICS, Snapshot, StepControl, Trajectory,
                       advective_flux, dt_limit, run, step_imex,
                       step_transport)
from .estimates import (CheckResult, EstimateReport, check_derivative_norms,
                        check_energy_bistable, check_entropy_monostable,
                        check_gradient_bounds, check_mass_bound,
                        run_trajectory_checks)
from .experiments import (OrderReport, StabilityReport, SweepReport,
                          defect_refinement, delta_sweep, gronwall_stability,
                          mms_order_study)
from .config import RunConfig, parse_config

__all__ = [
    "__version__",
    "DriftclusterError", "ValidationError", "StructuralError",
    "SingularSystemError", "CflViolationError", "DivergenceError",
    "ConfigError",
    "Grid", "norm_l1", "norm_l2", "norm_sup", "total_mass",
    "centered_gradient",
    "Params", "InitialCondition", "build_initial", "reproduction_rate",
    "Velocity", "solve_helmholtz", "solve_velocity",
    "StepControl", "Trajectory", "Snapshot", "DIAGNOSTICS",
    "advective_flux", "dt_limit", "step_imex", "step_transport", "run",
    "CheckResult", "EstimateReport", "check_mass_bound",
    "check_energy_bistable", "check_entropy_monostable",
    "check_gradient_bounds", "check_derivative_norms",
    "run_trajectory_checks",
    "SweepReport", "OrderReport", "StabilityReport", "delta_sweep",
    "mms_order_study", "gronwall_stability", "defect_refinement",
    "RunConfig", "parse_config",
]
