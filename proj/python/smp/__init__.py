"""Boundary control of stochastic parabolic systems with dynamical boundary conditions.

Thin wrapper over the C++ core: problem assembly from TOML configs, the
drift-implicit forward solver, exact discrete adjoints, Monte Carlo cost and
gradient estimators, optimality residuals and the projected-gradient optimizer.
"""

from smp._core import (
    AdjointTrajectory,
    ControlField,
    CostEstimate,
    GradientEstimate,
    IterationRecord,
    OptimalityReport,
    OptimizeResult,
    OptimizerOptions,
    Problem,
    ResidualResult,
    ResidualWitness,
    RunHistory,
    SmpError,
    StateTrajectory,
    SufficiencyResult,
    check_sufficient,
    estimate_cost,
    estimate_gradient,
    gronwall_bound,
    load_problem,
    pathwise_cost,
    run_optimizer,
    smp_residual,
    solve_adjoint,
    solve_forward,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AdjointTrajectory",
    "ControlField",
    "CostEstimate",
    "GradientEstimate",
    "IterationRecord",
    "OptimalityReport",
    "OptimizeResult",
    "OptimizerOptions",
    "Problem",
    "ResidualResult",
    "ResidualWitness",
    "RunHistory",
    "SmpError",
    "StateTrajectory",
    "SufficiencyResult",
    "check_sufficient",
    "estimate_cost",
    "estimate_gradient",
    "gronwall_bound",
    "load_problem",
    "pathwise_cost",
    "run_optimizer",
    "smp_residual",
    "solve_adjoint",
    "solve_forward",
    "validate",
]
