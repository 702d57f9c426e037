"""Equilibrium targets the dynamics relaxes to."""

from typing import Union

from oqt_sim.core.states import DensityMatrix
from oqt_sim.targets.canonical import CanonicalTarget, build_canonical
from oqt_sim.targets.microcanonical import (
    MicrocanonicalTarget,
    apply_charge_filter,
    build_microcanonical,
    restrict_to_window,
)

Target = Union[MicrocanonicalTarget, CanonicalTarget]


def as_density(target: Target) -> DensityMatrix:
    """The target as a diagonal density matrix."""
    return DensityMatrix.diagonal(target.weights)


__all__ = [
    "CanonicalTarget",
    "MicrocanonicalTarget",
    "Target",
    "apply_charge_filter",
    "as_density",
    "build_canonical",
    "build_microcanonical",
    "restrict_to_window",
]
