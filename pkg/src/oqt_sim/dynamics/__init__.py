"""Trajectory (Ito SSE) and ensemble (GKSL) dynamics."""

from oqt_sim.dynamics.ensemble import (
    EnsembleRecord,
    GKSLModel,
    analytic_oqt_solution,
    gksl_rhs,
    propagate,
)
from oqt_sim.dynamics.generators import OQTGenerator, SUVGenerator
from oqt_sim.dynamics.noise import WienerSource
from oqt_sim.dynamics.pool import TrajectoryEnsemble, run_trajectory_ensemble
from oqt_sim.dynamics.steady_state import SteadyStateReport, hybrid_steady_state, liouvillian
from oqt_sim.dynamics.trajectory import (
    TrajectoryRecord,
    integrate_trajectory,
    oqt_step,
    sui_step,
    suv_step,
)

__all__ = [
    "EnsembleRecord",
    "GKSLModel",
    "OQTGenerator",
    "SUVGenerator",
    "SteadyStateReport",
    "TrajectoryEnsemble",
    "TrajectoryRecord",
    "WienerSource",
    "analytic_oqt_solution",
    "gksl_rhs",
    "hybrid_steady_state",
    "integrate_trajectory",
    "liouvillian",
    "oqt_step",
    "propagate",
    "run_trajectory_ensemble",
    "sui_step",
    "suv_step",
]
