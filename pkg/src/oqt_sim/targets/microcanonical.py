"""Microcanonical targets built from the energy statistics of an initial state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from oqt_sim.core.functionals import energy_stats
from oqt_sim.core.states import DensityMatrix, SpectralModel, StateVector
from oqt_sim.errors import ConfigurationError, ContractViolation, DomainError, InternalError
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

WINDOW_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class MicrocanonicalTarget:
    """Uniform diagonal distribution over the energy levels of a window.

    ``psi_energy`` and ``psi_variance`` are the statistics the window was
    built from; ``energy_offset`` is Tr[chi H] - E_psi, which need not vanish.
    """

    members: Tuple[int, ...]
    omega: int
    weights: np.ndarray
    window: Tuple[float, float]
    charge_window: Optional[Tuple[float, float]] = None
    psi_energy: float = 0.0
    psi_variance: float = 0.0
    target_energy: float = 0.0

    @property
    def dim(self) -> int:
        return int(self.weights.size)

    @property
    def energy_offset(self) -> float:
        return self.target_energy - self.psi_energy

    def outside_weight(self, state: Union[StateVector, DensityMatrix]) -> float:
        """Population of ``state`` on levels outside the window."""
        outside = np.ones(self.dim, dtype=bool)
        outside[list(self.members)] = False
        return float(np.sum(state.populations[outside]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "microcanonical",
            "members": list(self.members),
            "omega": self.omega,
            "weights": [float(w) for w in self.weights],
            "window": list(self.window),
            "charge_window": list(self.charge_window) if self.charge_window else None,
            "psi_energy": self.psi_energy,
            "psi_variance": self.psi_variance,
            "energy_offset": self.energy_offset,
        }


def _uniform_weights(dim: int, members: Tuple[int, ...]) -> np.ndarray:
    weights = np.zeros(dim, dtype=np.float64)
    weights[list(members)] = 1.0 / len(members)
    weights.setflags(write=False)
    return weights


def _degenerate_clusters(energies: np.ndarray, tolerance: float) -> np.ndarray:
    """Cluster label per level; consecutive levels closer than ``tolerance`` share a label."""
    gaps = np.diff(energies)
    return np.concatenate(([0], np.cumsum(gaps > tolerance)))


def _in_window(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return (values >= lo - WINDOW_SLACK) & (values <= hi + WINDOW_SLACK)


def build_microcanonical(
    psi0: Union[StateVector, DensityMatrix], model: SpectralModel
) -> MicrocanonicalTarget:
    """Window [E - sqrt(V), E + sqrt(V)] around the initial energy statistics.

    Degenerate levels are taken all-or-none: if any level of a cluster lies
    in the window, the whole cluster joins W.
    """
    mean, variance = energy_stats(psi0, model)
    half_width = float(np.sqrt(variance))
    lo, hi = mean - half_width, mean + half_width

    energies = model.energies
    inside = _in_window(energies, lo, hi)
    clusters = _degenerate_clusters(energies, model.degeneracy_tolerance)
    inside = np.isin(clusters, clusters[inside])

    members = tuple(int(i) for i in np.flatnonzero(inside))
    if not members:
        raise InternalError(
            f"empty microcanonical window [{lo:.12g}, {hi:.12g}] "
            f"for E={mean:.12g}, V={variance:.3e}"
        )

    weights = _uniform_weights(model.dim, members)
    target = MicrocanonicalTarget(
        members=members,
        omega=len(members),
        weights=weights,
        window=(lo, hi),
        psi_energy=mean,
        psi_variance=variance,
        target_energy=float(weights @ energies),
    )

    logger.debug(
        "Built microcanonical target",
        extra={
            "omega": target.omega,
            "window": target.window,
            "energy_offset": target.energy_offset,
        },
    )
    return target


def apply_charge_filter(
    target: MicrocanonicalTarget,
    psi0: Union[StateVector, DensityMatrix],
    model: SpectralModel,
) -> MicrocanonicalTarget:
    """Restrict W to levels whose charge lies in [S - dS, S + dS] of ``psi0``."""
    if model.charge is None:
        raise ContractViolation("apply_charge_filter needs a model with a charge diagonal")
    if psi0.dim != model.dim or target.dim != model.dim:
        raise ContractViolation("target, state and model dimensions differ")

    p = psi0.populations
    charge = model.charge
    s_mean = float(p @ charge)
    s_var = max(float(p @ charge**2) - s_mean**2, 0.0)
    s_half = float(np.sqrt(s_var))
    s_lo, s_hi = s_mean - s_half, s_mean + s_half

    members = tuple(m for m in target.members if _in_window(charge[m : m + 1], s_lo, s_hi)[0])
    if not members:
        raise ConfigurationError(
            "charge filter left no members: energy window "
            f"[{target.window[0]:.12g}, {target.window[1]:.12g}], "
            f"charge window [{s_lo:.12g}, {s_hi:.12g}]"
        )

    weights = _uniform_weights(model.dim, members)
    return MicrocanonicalTarget(
        members=members,
        omega=len(members),
        weights=weights,
        window=target.window,
        charge_window=(s_lo, s_hi),
        psi_energy=target.psi_energy,
        psi_variance=target.psi_variance,
        target_energy=float(weights @ model.energies),
    )


def restrict_to_window(psi: StateVector, target: MicrocanonicalTarget) -> StateVector:
    """Project ``psi`` onto the span of the window levels and renormalize."""
    if psi.dim != target.dim:
        raise ContractViolation(f"state has dimension {psi.dim}, target has {target.dim}")
    amps = np.zeros(psi.dim, dtype=np.complex128)
    members = list(target.members)
    amps[members] = psi.amplitudes[members]
    if not np.any(amps):
        raise DomainError("state has no weight inside the microcanonical window")
    return StateVector(amps).normalize()
