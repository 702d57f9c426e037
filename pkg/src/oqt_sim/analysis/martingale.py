"""Martingale tests on diagonal weights in the energy or collapse basis."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Union

import numpy as np

from oqt_sim.analysis.fitting import shared_rate_fit
from oqt_sim.dynamics.ensemble import EnsembleRecord
from oqt_sim.dynamics.pool import TrajectoryEnsemble
from oqt_sim.errors import ContractViolation, InsufficientDataError
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

MIN_SAMPLES = 100
SIGMA_LEVEL = 3.0
DETERMINISTIC_TOL = 1e-9
DRIFT_FLOOR = 1e-12


class MartingaleBasis(Enum):
    ENERGY = "energy"
    SECTOR = "sector"


class Verdict(Enum):
    CONSISTENT = "MARTINGALE-CONSISTENT"
    DRIFTING = "DRIFTING"


@dataclass(frozen=True)
class ComponentDrift:
    index: int
    drift: float
    stderr: float
    consistent: bool


@dataclass
class MartingaleReport:
    basis: MartingaleBasis
    verdict: Verdict
    components: List[ComponentDrift]
    n_samples: int
    fitted_rate: Optional[float] = None

    @property
    def drifting(self) -> List[int]:
        return [c.index for c in self.components if not c.consistent]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "basis": self.basis.value,
            "verdict": self.verdict.value,
            "n_samples": self.n_samples,
            "fitted_rate": self.fitted_rate,
            "drifting": self.drifting,
            "components": [
                {"index": c.index, "drift": c.drift, "stderr": c.stderr, "consistent": c.consistent}
                for c in self.components
            ],
        }


Records = Union[TrajectoryEnsemble, EnsembleRecord]


def _series(records: Records, basis: MartingaleBasis) -> np.ndarray:
    """Diagonal weights with shape (n_members, n_times, n_components)."""
    if isinstance(records, TrajectoryEnsemble):
        if basis is MartingaleBasis.ENERGY:
            return records.populations()
        weights = records.sector_weights()
        if weights is None:
            raise ContractViolation("sector basis needs trajectories run with an SUV generator")
        return weights

    if basis is MartingaleBasis.ENERGY:
        return records.diagonals[None]
    if "sector_populations" not in records.series:
        raise ContractViolation("sector basis needs a record propagated with an SUV generator")
    return records.series["sector_populations"][None]


def martingale_report(
    records: Records, basis: MartingaleBasis = MartingaleBasis.ENERGY
) -> MartingaleReport:
    """Mean drift E[z_j(t_end)] - z_j(0) per component with a 3-sigma verdict.

    For a trajectory ensemble the samples are trajectories; for a master
    equation record they are time samples and drift is compared with 1e-9.
    Drifting components get one shared exponential relaxation rate.
    """
    stochastic = isinstance(records, TrajectoryEnsemble)
    n_samples = records.n_trajectories if stochastic else records.n_samples
    if n_samples < MIN_SAMPLES:
        raise InsufficientDataError(
            f"martingale report needs at least {MIN_SAMPLES} samples, got {n_samples}"
        )

    series = _series(records, basis)
    n_members = series.shape[0]
    if stochastic:
        mean = records.mean(series)
    else:
        mean = series[0]

    initial = mean[0]
    final = series[:, -1, :]
    drift = mean[-1] - initial
    if stochastic:
        stderr = np.std(final, axis=0, ddof=1) / np.sqrt(n_members)
        threshold = SIGMA_LEVEL * stderr + DRIFT_FLOOR
    else:
        stderr = np.zeros_like(drift)
        threshold = np.full_like(drift, DETERMINISTIC_TOL)

    components = [
        ComponentDrift(j, float(drift[j]), float(stderr[j]), bool(abs(drift[j]) <= threshold[j]))
        for j in range(drift.size)
    ]
    verdict = Verdict.CONSISTENT if all(c.consistent for c in components) else Verdict.DRIFTING

    rate = None
    if verdict is Verdict.DRIFTING:
        idx = [c.index for c in components if not c.consistent]
        rate = shared_rate_fit(records.times, mean[:, idx], initial[idx])

    report = MartingaleReport(basis, verdict, components, n_samples, rate)
    logger.info(
        "Martingale report",
        extra={"basis": basis.value, "verdict": verdict.value, "fitted_rate": rate},
    )
    return report
