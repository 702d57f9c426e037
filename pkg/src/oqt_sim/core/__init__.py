"""State types and measurement-free functionals in the energy eigenbasis."""

from oqt_sim.core.functionals import (
    Subsystem,
    energy_stats,
    expectation,
    partial_trace,
    relative_entropy,
    tensor_product,
    trace_distance_sq,
    von_neumann_entropy,
)
from oqt_sim.core.states import DensityMatrix, Observable, SpectralModel, StateVector

__all__ = [
    "DensityMatrix",
    "Observable",
    "SpectralModel",
    "StateVector",
    "Subsystem",
    "energy_stats",
    "expectation",
    "partial_trace",
    "relative_entropy",
    "tensor_product",
    "trace_distance_sq",
    "von_neumann_entropy",
]
