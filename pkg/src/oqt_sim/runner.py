"""Run one configured experiment and write its artifacts.

Output tree under the config's ``output_dir``:

    provenance.json   config, hash, seeds, decisions, run id, version
    curves/*.csv      one table per curve
    summary.txt       one PASS/FAIL line per invariant check
    metrics.prom      Prometheus text exposition (when metrics are enabled)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from oqt_sim import __version__
from oqt_sim.artifacts.writers import (
    CheckResult,
    config_hash,
    write_curves,
    write_provenance,
    write_summary,
)
from oqt_sim.config.scenario import ScenarioConfig, config_to_dict
from oqt_sim.config.settings import Config, get_config
from oqt_sim.errors import OQTError
from oqt_sim.experiments import ExperimentResult, get_experiment
from oqt_sim.monitoring.metrics import get_metrics_collector, track_run_duration
from oqt_sim.utils.structured_logging import LogContext, get_logger

logger = get_logger(__name__)

# Interpretation choices recorded with every run
DECISIONS: Dict[str, Any] = {
    "fig1_state_mean": "0.6 of the spectral range above E_min",
    "fig1_state_width": "amplitude profile exp(-(E-Ebar)^2/(4 sigma^2)), sigma = 0.2 of the range",
    "fig1_gap_floor": 1e-6,
    "fig1_alpha_grid": "(0, 0.5, 1, 2) unless configured",
    "trajectory_integrator": "Euler-Maruyama, exact unitary phases, renormalized each step",
    "master_integrator": "RK4, re-Hermitized each step, trace renormalized beyond 1e-12",
    "noise_channel_order": "row-major over (mu in W, nu), then SUV sectors ascending",
    "diagonal_channels": True,
    "seed_streams": "PCG64(SeedSequence(seed, spawn_key=(trajectory index,)))",
    "microcanonical_energy_offset": "recorded, not reweighted",
    "degenerate_levels": "all-or-none per degenerate cluster",
    "no_signalling_reference": "free evolution U_B(t) rho_B(0) U_B(t)^dag",
    "entropy_monotonicity": "enforced for in-window starts with a microcanonical target",
    "sector_collapse_time": "J t = 40, separate from the J t = 8 Martingale window",
}


@dataclass
class RunOutcome:
    """What a run leaves behind: the verdicts and where the artifacts are."""

    out_dir: Path
    checks: List[CheckResult] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    @property
    def exit_code(self) -> int:
        return 0 if self.checks and not self.failed else 1


def build_provenance(
    config: ScenarioConfig, run_id: str, result: Optional[ExperimentResult] = None
) -> Dict[str, Any]:
    normalized = config_to_dict(config)
    provenance: Dict[str, Any] = {
        "tool": "oqt-sim",
        "version": __version__,
        "run_id": run_id,
        "experiment": config.experiment.value,
        "config": normalized,
        "config_hash": config_hash(normalized),
        "seeds": config.seeds or [config.seed],
        "decisions": DECISIONS,
    }
    if result is not None:
        provenance["report"] = result.report
        provenance["curves"] = sorted(result.curves)
    return provenance


def finish(
    out_dir: Path,
    checks: List[CheckResult],
    provenance: Dict[str, Any],
    curves: Optional[Dict[str, Dict[str, Any]]] = None,
    settings: Optional[Config] = None,
) -> RunOutcome:
    """Write provenance, curves, summary and metrics; shared by runs and suites."""
    settings = settings or get_config()
    collector = get_metrics_collector()
    for check in checks:
        collector.record_check(check.name, check.passed)

    write_provenance(out_dir, provenance)
    if curves:
        write_curves(out_dir, curves)
    write_summary(out_dir, checks)
    if settings.monitoring.enable_metrics:
        collector.write(out_dir / settings.monitoring.metrics_file)

    outcome = RunOutcome(out_dir=out_dir, checks=checks, provenance=provenance)
    for check in outcome.failed:
        logger.error(f"FAILED {check.name}", extra={"detail": check.detail})
    logger.info(
        "Run finished",
        extra={"checks": len(checks), "failed": len(outcome.failed), "out_dir": str(out_dir)},
    )
    return outcome


def run(
    config: ScenarioConfig,
    settings: Optional[Config] = None,
    workers: Optional[int] = None,
) -> RunOutcome:
    """Execute the named experiment; exit code 0 iff every check passed."""
    settings = settings or get_config()
    workers = workers or settings.execution.workers
    out_dir = Path(config.output_dir)
    experiment = get_experiment(config.experiment)

    with LogContext() as ctx:
        provenance = build_provenance(config, ctx.rid)
        logger.info(
            "Run started",
            extra={
                "experiment": config.experiment.value,
                "config_hash": provenance["config_hash"],
                "workers": workers,
            },
        )

        timed = track_run_duration(config.experiment.value)(experiment)
        try:
            result = timed(
                config,
                workers=workers,
                batch_size=settings.execution.batch_size,
                noise_block=settings.execution.noise_block,
            )
        except OQTError as e:
            logger.error(f"Run aborted: {e}", extra={"error": type(e).__name__})
            detail = f"{type(e).__name__}: {e}"
            checks = [CheckResult(f"{config.experiment.value}.run", False, detail)]
            return finish(out_dir, checks, provenance, settings=settings)

        provenance = build_provenance(config, ctx.rid, result)
        return finish(out_dir, result.checks, provenance, result.curves, settings)
