"""Collapse against thermalization on an eight-level system.

The SUV generator alone keeps sector and level populations as Martingales,
so the ensemble remembers its Born weights and never reaches chi_E. The OQT
generator alone drifts the energy populations to 1/Omega on W.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from oqt_sim.analysis.martingale import (
    MartingaleBasis,
    MartingaleReport,
    Verdict,
    martingale_report,
)
from oqt_sim.config.scenario import ScenarioConfig
from oqt_sim.core.states import SpectralModel, StateVector
from oqt_sim.dynamics.generators import OQTGenerator, SUVGenerator
from oqt_sim.dynamics.pool import TrajectoryEnsemble, run_trajectory_ensemble
from oqt_sim.experiments.base import (
    ExperimentResult,
    build_fig1_hamiltonian,
    curve,
    fraction_within,
)
from oqt_sim.targets.microcanonical import MicrocanonicalTarget, build_microcanonical
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

RATE_REL_TOL = 0.10
BORN_DISTANCE_SHARE = 0.9
SAMPLES_PER_RUN = 80
COLLAPSE_TIME = 40.0
COLLAPSE_TOL = 1e-6


def linear_born_state(dim: int) -> StateVector:
    """Real amplitudes sqrt(w_i) with w_i proportional to i + 1."""
    w = np.arange(1, dim + 1, dtype=np.float64)
    return StateVector(np.sqrt(w / w.sum()).astype(np.complex128))


def born_distance(weights: np.ndarray, target: MicrocanonicalTarget) -> float:
    """Tr[(rho_Born - chi_E)^2] for the dephased state diag(weights)."""
    return float(np.sum((np.asarray(weights) - np.asarray(target.weights)) ** 2))


@dataclass
class SeedOutcome:
    seed: int
    suv_sector: MartingaleReport
    suv_energy: MartingaleReport
    oqt_energy: MartingaleReport
    suv_distance: float
    oqt_distance: float
    born_distance: float
    suv_terminal_share: float
    oqt_terminal_share: float
    collapse_residual: float
    selection_frequencies: np.ndarray
    selection_born: np.ndarray
    selection_share: float
    curves: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict, repr=False)

    @property
    def verdicts(self) -> Dict[str, str]:
        return {
            "SUV sector": self.suv_sector.verdict.value,
            "SUV energy": self.suv_energy.verdict.value,
            "OQT energy": self.oqt_energy.verdict.value,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "verdicts": self.verdicts,
            "suv_sector": self.suv_sector.to_dict(),
            "suv_energy": self.suv_energy.to_dict(),
            "oqt_energy": self.oqt_energy.to_dict(),
            "suv_terminal_distance": self.suv_distance,
            "oqt_terminal_distance": self.oqt_distance,
            "born_distance": self.born_distance,
            "collapse_residual": self.collapse_residual,
            "selection_frequencies": [float(f) for f in self.selection_frequencies],
            "selection_born": [float(p) for p in self.selection_born],
        }


@dataclass
class AppendixAReport:
    dim: int
    alpha_eff: float
    j_eff: float
    target: MicrocanonicalTarget
    outcomes: List[SeedOutcome]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "alpha_eff": self.alpha_eff,
            "j_eff": self.j_eff,
            "target": self.target.to_dict(),
            "seeds": [o.to_dict() for o in self.outcomes],
        }


def _terminal_distance(ensemble: TrajectoryEnsemble, target: MicrocanonicalTarget) -> float:
    mean, _, _ = ensemble.mean_projector()
    return float(np.sum(np.abs(mean[-1] - np.diag(target.weights)) ** 2))


def _terminal_share(
    ensemble: TrajectoryEnsemble, expected: np.ndarray, levels: Optional[Sequence[int]] = None
) -> float:
    pops = ensemble.populations()[:, -1, :]
    if levels is not None:
        pops, expected = pops[:, list(levels)], expected[list(levels)]
    mean = ensemble.mean(pops)
    stderr = np.std(pops, axis=0, ddof=1) / np.sqrt(pops.shape[0])
    return fraction_within(mean, expected, stderr)


def _sector_selection(
    ensemble: TrajectoryEnsemble, born: np.ndarray
) -> Tuple[float, np.ndarray, float]:
    """Terminal collapse of each trajectory and how often each sector is selected.

    Returns the largest distance of a terminal sector weight from {0, 1}, the
    selection frequencies, and the share of sectors whose frequency lies within
    3 binomial sigma of its Born weight.
    """
    z = ensemble.sector_weights()[:, -1, :]
    residual = float(np.max(np.minimum(z, 1.0 - z)))
    n = z.shape[0]
    frequencies = np.bincount(np.argmax(z, axis=1), minlength=z.shape[1]) / n
    stderr = np.sqrt(born * (1.0 - born) / n)
    return residual, frequencies, fraction_within(frequencies, born, stderr)


def _run(
    psi0: StateVector,
    generator: object,
    model: SpectralModel,
    rate: float,
    coupling_time: float,
    coupling_dt: float,
    n_trajectories: int,
    seed: int,
    workers: int,
    batch_size: int,
    noise_block: int,
) -> TrajectoryEnsemble:
    dt = coupling_dt / rate
    n_steps = int(round(coupling_time / coupling_dt))
    stride = max(n_steps // SAMPLES_PER_RUN, 1)
    return run_trajectory_ensemble(
        psi0,
        [generator],
        model,
        dt,
        n_steps,
        n_trajectories,
        seed,
        sample_stride=stride,
        workers=workers,
        batch_size=batch_size,
        noise_block=noise_block,
    )


def run_appendix_a(
    d: int = 8,
    seeds: Sequence[int] = (0,),
    alpha_eff: float = 1.0,
    j_eff: float = 1.0,
    n_trajectories: int = 2000,
    n_sectors: int = 2,
    coupling_time: float = 8.0,
    coupling_dt: float = 0.01,
    collapse_time: float = COLLAPSE_TIME,
    workers: int = 1,
    batch_size: int = 250,
    noise_block: int = 256,
) -> AppendixAReport:
    """SUV-only and OQT-only ensembles from the same non-uniform Born weights.

    Each run covers ``coupling_time`` in units of its own inverse coupling
    with step ``coupling_dt`` in the same units. A longer SUV-only run over
    ``collapse_time`` checks that every trajectory ends in one sector.
    """
    psi0 = linear_born_state(d)
    weights = psi0.populations
    suv = SUVGenerator.contiguous(d, n_sectors, j_eff)
    common = dict(
        coupling_time=coupling_time,
        coupling_dt=coupling_dt,
        n_trajectories=n_trajectories,
        workers=workers,
        batch_size=batch_size,
        noise_block=noise_block,
    )

    outcomes = []
    target: Optional[MicrocanonicalTarget] = None
    for seed in seeds:
        model = build_fig1_hamiltonian(seed, d)
        target = build_microcanonical(psi0, model)
        oqt = OQTGenerator(alpha_eff, target)
        logger.info("appendix_a seed", extra={"seed": seed, "omega": target.omega})

        suv_runs = _run(psi0, suv, model, j_eff, seed=seed, **common)
        oqt_runs = _run(psi0, oqt, model, alpha_eff, seed=seed, **common)
        long_runs = _run(
            psi0, suv, model, j_eff, seed=seed, **{**common, "coupling_time": collapse_time}
        )
        born = suv.sector_weights(weights)
        residual, frequencies, selection_share = _sector_selection(long_runs, born)

        suv_sector = martingale_report(suv_runs, MartingaleBasis.SECTOR)
        outcome = SeedOutcome(
            seed=seed,
            suv_sector=suv_sector,
            suv_energy=martingale_report(suv_runs, MartingaleBasis.ENERGY),
            oqt_energy=martingale_report(oqt_runs, MartingaleBasis.ENERGY),
            suv_distance=_terminal_distance(suv_runs, target),
            oqt_distance=_terminal_distance(oqt_runs, target),
            born_distance=born_distance(weights, target),
            suv_terminal_share=_terminal_share(suv_runs, weights),
            oqt_terminal_share=_terminal_share(
                oqt_runs, np.asarray(target.weights), target.members
            ),
            collapse_residual=residual,
            selection_frequencies=frequencies,
            selection_born=born,
            selection_share=selection_share,
        )
        outcome.curves[f"appendix_a_seed{seed}_suv_sectors"] = curve(
            suv_runs.times * j_eff,
            **{f"z_{k}": col for k, col in enumerate(suv_runs.mean(suv_runs.sector_weights()).T)},
        )
        outcome.curves[f"appendix_a_seed{seed}_oqt_populations"] = curve(
            oqt_runs.times * alpha_eff,
            **{f"p_{i}": col for i, col in enumerate(oqt_runs.mean(oqt_runs.populations()).T)},
        )
        outcomes.append(outcome)

    return AppendixAReport(d, alpha_eff, j_eff, target, outcomes)


def from_config(config: ScenarioConfig, workers: int = 1, **execution: Any) -> ExperimentResult:
    result = ExperimentResult("appendix_a")
    seeds = config.seeds or [config.seed]
    report = run_appendix_a(
        d=config.dim,
        seeds=seeds,
        alpha_eff=config.alpha_eff,
        j_eff=config.j_eff,
        n_trajectories=config.ensemble_size,
        n_sectors=config.n_sectors,
        coupling_time=config.coupling_time,
        coupling_dt=config.coupling_dt,
        workers=workers,
        **execution,
    )

    for o in report.outcomes:
        prefix = f"appendix_a.seed{o.seed}"
        result.check(
            f"{prefix}.suv_sector_martingale",
            o.suv_sector.verdict is Verdict.CONSISTENT,
            o.suv_sector.verdict.value,
        )
        result.check(
            f"{prefix}.suv_energy_martingale",
            o.suv_energy.verdict is Verdict.CONSISTENT,
            o.suv_energy.verdict.value,
        )
        rate = o.oqt_energy.fitted_rate
        alpha = report.alpha_eff
        rate_ok = rate is not None and abs(rate - alpha) <= RATE_REL_TOL * alpha
        result.check(
            f"{prefix}.oqt_energy_drifting",
            o.oqt_energy.verdict is Verdict.DRIFTING and rate_ok,
            f"{o.oqt_energy.verdict.value}, fitted rate "
            f"{rate if rate is not None else float('nan'):.4g}",
        )
        result.check(
            f"{prefix}.suv_no_equilibrium",
            o.suv_distance > BORN_DISTANCE_SHARE * o.born_distance,
            f"D(rho_inf, chi_E)={o.suv_distance:.4g}, Born distance {o.born_distance:.4g}",
        )
        result.check(
            f"{prefix}.suv_terminal_born_weights",
            o.suv_terminal_share == 1.0,
            f"{o.suv_terminal_share:.0%} of levels within 3 sigma of the Born weights",
        )
        result.check(
            f"{prefix}.suv_terminal_collapse",
            o.collapse_residual <= COLLAPSE_TOL,
            f"max distance of a terminal sector weight from {{0, 1}}: {o.collapse_residual:.2e}",
        )
        result.check(
            f"{prefix}.suv_sector_selection_born",
            o.selection_share == 1.0,
            "selection frequencies "
            + ", ".join(f"{f:.4f}" for f in o.selection_frequencies)
            + " vs Born "
            + ", ".join(f"{p:.4f}" for p in o.selection_born),
        )
        result.check(
            f"{prefix}.oqt_terminal_microcanonical",
            o.oqt_terminal_share == 1.0,
            f"{o.oqt_terminal_share:.0%} of levels within 3 sigma of chi_E",
        )
        result.curves.update(o.curves)

    result.report = report.to_dict()
    return result
