"""Canonical (Gibbs) targets at the temperature matching a given energy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp, softmax

from oqt_sim.core.states import SpectralModel
from oqt_sim.errors import DomainError
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

BETA_SCALE = 1e4
INFINITE_TEMPERATURE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CanonicalTarget:
    """chi_beta = exp(-beta H) / Z on the full spectrum."""

    beta: float
    weights: np.ndarray
    log_partition: float

    @property
    def dim(self) -> int:
        return int(self.weights.size)

    @property
    def members(self) -> Tuple[int, ...]:
        return tuple(range(self.dim))

    @property
    def omega(self) -> int:
        return self.dim

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "canonical",
            "beta": self.beta,
            "log_partition": self.log_partition,
            "weights": [float(w) for w in self.weights],
        }


def _gibbs(beta: float, energies: np.ndarray) -> CanonicalTarget:
    weights = softmax(-beta * energies)
    weights.setflags(write=False)
    return CanonicalTarget(
        beta=float(beta),
        weights=weights,
        log_partition=float(logsumexp(-beta * energies)),
    )


def build_canonical(target_energy: float, model: SpectralModel) -> CanonicalTarget:
    """Solve Tr[chi_beta H] = target_energy for beta by bracketed root finding.

    The mean energy is monotone decreasing in beta, so the root on
    [-beta_max, beta_max] with beta_max = 1e4 / (E_max - E_min) is unique.
    """
    energies = model.energies
    e_min, e_max = float(energies[0]), float(energies[-1])
    infinite_temperature = float(np.mean(energies))

    scale = max(1.0, abs(infinite_temperature))
    if abs(target_energy - infinite_temperature) <= INFINITE_TEMPERATURE_TOL * scale:
        return _gibbs(0.0, energies)

    if not e_min < target_energy < e_max:
        raise DomainError(
            f"target energy {target_energy!r} outside the open spectral range "
            f"({e_min!r}, {e_max!r})"
        )

    beta_max = BETA_SCALE / (e_max - e_min)

    def excess(beta: float) -> float:
        return float(softmax(-beta * energies) @ energies) - target_energy

    lo_excess, hi_excess = excess(-beta_max), excess(beta_max)
    if lo_excess < 0 or hi_excess > 0:
        raise DomainError(
            f"target energy {target_energy!r} is too close to the spectral edge to bracket beta"
        )

    beta = brentq(excess, -beta_max, beta_max, xtol=1e-14, rtol=1e-12, maxiter=500)
    target = _gibbs(beta, energies)
    logger.debug("Solved canonical target", extra={"beta": target.beta, "energy": target_energy})
    return target
