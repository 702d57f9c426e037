"""User-defined hybrid runs on the random ladder with configurable observables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from oqt_sim.analysis.laws import energy_bookkeeping_check
from oqt_sim.config.scenario import ScenarioConfig
from oqt_sim.config.settings import RunMode
from oqt_sim.core.states import Observable
from oqt_sim.dynamics.ensemble import EnsembleRecord, GKSLModel, propagate
from oqt_sim.dynamics.generators import OQTGenerator, SUVGenerator
from oqt_sim.dynamics.pool import TrajectoryEnsemble, run_trajectory_ensemble
from oqt_sim.experiments.base import (
    ExperimentResult,
    build_fig1_hamiltonian,
    build_fig1_state,
    curve,
    fraction_within,
    resolve_observable,
)
from oqt_sim.targets.microcanonical import build_microcanonical
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

POSITIVITY_TOL = 1e-9
SECTOR_TOL = 1e-9
EQUILIBRIUM_HORIZON = 40.0
EQUILIBRIUM_TOL = 1e-10
CONSISTENCY_SHARE = 0.9
CROSS_CHECK_FLOOR = 1e-6
RESIDUAL_SHARE = 0.1


@dataclass
class CustomRun:
    master: Optional[EnsembleRecord] = None
    trajectories: Optional[TrajectoryEnsemble] = None


def _check_master(record: EnsembleRecord, m: GKSLModel, result: ExperimentResult) -> None:
    traces = np.array([rho.trace() for rho in record.states])
    result.check(
        "custom.trace_preserved",
        float(np.max(np.abs(traces - 1.0))) <= 1e-10,
        f"max |Tr rho - 1| = {float(np.max(np.abs(traces - 1.0))):.2e}",
    )
    smallest = min(float(rho.eigenvalues()[0]) for rho in record.states)
    result.check("custom.positivity", smallest >= -POSITIVITY_TOL, f"min eigenvalue {smallest:.3e}")

    if m.suv is not None and m.alpha_eff == 0:
        sectors = record.series["sector_populations"]
        drift = float(np.max(np.abs(sectors - sectors[0])))
        result.check(
            "custom.sector_populations_constant",
            drift <= SECTOR_TOL,
            f"max sector population change {drift:.2e}",
        )

    if m.suv is None and m.alpha_eff > 0:
        bookkeeping = energy_bookkeeping_check(record, m.target, m.model)
        result.check(
            "custom.energy_bookkeeping",
            bookkeeping.passed,
            f"generator error {bookkeeping.max_generator_error:.2e}, "
            f"epsilon_E {bookkeeping.epsilon_e:.6g}",
        )

    if m.alpha_eff * record.times[-1] >= EQUILIBRIUM_HORIZON:
        final = float(record.series["trace_distance"][-1])
        result.check(
            "custom.equilibrium_reached",
            final <= EQUILIBRIUM_TOL,
            f"D(rho(t_end), chi_E) = {final:.3e}",
        )


def _check_trajectories(
    ensemble: TrajectoryEnsemble, rate: float, dt: float, result: ExperimentResult
) -> None:
    residual = float(np.mean(ensemble.step_residuals()))
    bound = max(RESIDUAL_SHARE * rate * dt, 1e-12)
    result.check(
        "custom.norm_residual_mean",
        abs(residual) <= bound,
        f"mean signed step residual {residual:.3e} (bound {bound:.1e})",
    )


def _check_consistency(
    record: EnsembleRecord,
    ensemble: TrajectoryEnsemble,
    observables: Sequence[Observable],
    result: ExperimentResult,
) -> None:
    shares = []
    for obs in observables:
        mean, stderr = ensemble.mean_expectation(obs.label)
        reference = np.interp(ensemble.times, record.times, record.observables[obs.label])
        shares.append(fraction_within(mean, reference, stderr, floor=CROSS_CHECK_FLOOR))
    share = min(shares) if shares else 1.0
    result.check(
        "custom.trajectory_master_consistency",
        share >= CONSISTENCY_SHARE,
        f"{share:.1%} of samples within 3 sigma",
    )


def run_custom(
    config: ScenarioConfig, workers: int = 1, **execution: Any
) -> Tuple[ExperimentResult, CustomRun]:
    """Propagate the configured hybrid dynamics in the configured mode."""
    result = ExperimentResult("custom")
    run = CustomRun()

    model = build_fig1_hamiltonian(config.seed, config.dim, config.spectrum, config.spacing_std)
    psi0 = build_fig1_state(
        model, config.seed, config.init_state_center, config.init_state_std, config.random_phases
    )
    target = build_microcanonical(psi0, model)
    oqt = OQTGenerator(config.alpha_eff, target)
    suv = None
    if config.j_eff > 0:
        suv = SUVGenerator.contiguous(model.dim, config.n_sectors, config.j_eff)
    observables: List[Observable] = [
        resolve_observable(spec, model, config.seed) for spec in config.observables or []
    ]

    logger.info(
        "Running custom scenario",
        extra={
            "dim": model.dim,
            "alpha_eff": config.alpha_eff,
            "j_eff": config.j_eff,
            "mode": config.mode.value,
        },
    )

    if config.mode in (RunMode.MASTER, RunMode.BOTH):
        m = GKSLModel(model, oqt=oqt, suv=suv)
        run.master = propagate(
            psi0.projector(), m, config.dt, config.n_steps, config.sample_stride, observables
        )
        result.curves["custom_master"] = run.master.columns()
        _check_master(run.master, m, result)

    if config.mode in (RunMode.TRAJECTORIES, RunMode.BOTH):
        generators = [g for g in (oqt, suv) if g is not None]
        run.trajectories = run_trajectory_ensemble(
            psi0,
            generators,
            model,
            config.dt,
            config.n_steps,
            config.ensemble_size,
            config.seed,
            observers=[(obs, config.sample_stride) for obs in observables],
            sample_stride=config.sample_stride,
            workers=workers,
            **execution,
        )
        ens = run.trajectories
        columns = {}
        for obs in observables:
            mean, stderr = ens.mean_expectation(obs.label)
            columns[f"{obs.label}_mean"] = mean
            columns[f"{obs.label}_stderr"] = stderr
        columns["E_mean"] = ens.mean(ens.energy_means())
        result.curves["custom_trajectories"] = curve(ens.times, **columns)
        _check_trajectories(ens, config.alpha_eff + config.j_eff, config.dt, result)

    if run.master is not None and run.trajectories is not None:
        _check_consistency(run.master, run.trajectories, observables, result)

    result.report = {"target": target.to_dict(), "observables": [o.label for o in observables]}
    return result, run


def from_config(config: ScenarioConfig, workers: int = 1, **execution: Any) -> ExperimentResult:
    result, _ = run_custom(config, workers, **execution)
    return result
