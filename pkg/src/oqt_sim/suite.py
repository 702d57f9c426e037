"""Self-test suites: analytic-oracle checks, mutation tests and the Monte Carlo criteria.

``quick`` runs the d <= 8 checks and both mutant detections in well under a
minute. ``full`` adds the 25-level criteria and the 2000-trajectory Monte
Carlo comparisons.
"""

from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from oqt_sim import __version__
from oqt_sim.analysis.constraints import (
    energy_constraint,
    generic_rhs,
    product_rates,
    steady_state_constraint,
)
from oqt_sim.analysis.fitting import trace_distance_decay_fit
from oqt_sim.analysis.laws import entropy_law_check, entropy_monotonicity_check
from oqt_sim.artifacts.writers import CheckResult
from oqt_sim.config.scenario import ExperimentName, emit_config, parse_config
from oqt_sim.config.settings import Config, get_config
from oqt_sim.core.functionals import von_neumann_entropy
from oqt_sim.core.states import DensityMatrix, SpectralModel, StateVector
from oqt_sim.dynamics.ensemble import (
    GKSLModel,
    analytic_oqt_solution,
    gksl_rhs,
    propagate,
    rhs_function,
)
from oqt_sim.dynamics.generators import OQTGenerator, SUVGenerator
from oqt_sim.dynamics.noise import WienerSource
from oqt_sim.dynamics.pool import run_trajectory_ensemble
from oqt_sim.dynamics.steady_state import hybrid_steady_state
from oqt_sim.dynamics.trajectory import integrate_batch, oqt_step, sui_step, suv_step
from oqt_sim.errors import OQTError
from oqt_sim.experiments import get_experiment
from oqt_sim.experiments.base import build_fig1_hamiltonian, build_fig1_state
from oqt_sim.experiments.fig1 import Fig1Scenario, run_fig1
from oqt_sim.experiments.no_signalling import (
    MUTANT_MIN_DEVIATION,
    WITNESS_TOL,
    run_no_signalling,
)
from oqt_sim.runner import DECISIONS, RunOutcome, finish
from oqt_sim.targets import as_density
from oqt_sim.targets.canonical import build_canonical
from oqt_sim.targets.microcanonical import (
    MicrocanonicalTarget,
    build_microcanonical,
    restrict_to_window,
)
from oqt_sim.utils.structured_logging import LogContext, get_logger

logger = get_logger(__name__)

ORACLE_TOL = 1e-8
DECAY_REL_TOL = 1e-3
ENTROPY_LAW_TOL = 0.02
EQUILIBRIUM_ENTROPY_TOL = 1e-6
STEADY_RESIDUAL_TOL = 1e-10
STEADY_MARCH_TOL = 1e-6
FDR_SHARE = 0.1
MC_FAILURE_RATE = 0.01
MC_FLOOR = 1e-6
STEADY_PAIRS = ((1.0, 1.0), (0.5, 2.0), (2.0, 0.5))


class SuiteLevel(str, Enum):
    QUICK = "quick"
    FULL = "full"


class UnsquaredNoiseGenerator(OQTGenerator):
    """Mutant: noise amplitude A^mu instead of sqrt(A^mu), breaking the FDR."""

    @property
    def noise_amplitudes(self) -> np.ndarray:
        return self.rates[self.members]


def untraced_rhs(m: GKSLModel):
    """Mutant: Lambda_chi without the Tr[rho] factor on chi."""
    energies = m.model.energies
    kernel = -1j * (energies[:, None] - energies[None, :]) - m.alpha_eff
    chi = np.diag(m.oqt.chi).astype(np.complex128)
    return lambda mat: kernel * mat + m.alpha_eff * chi


def _ladder(seed: int, dim: int) -> Tuple[SpectralModel, StateVector, MicrocanonicalTarget]:
    model = build_fig1_hamiltonian(seed, dim)
    psi0 = build_fig1_state(model, seed)
    return model, psi0, build_microcanonical(psi0, model)


def _pair_target(model: SpectralModel, lower: int) -> MicrocanonicalTarget:
    """Two-member window {lower, lower + 1} from the equal superposition of both levels."""
    amps = np.zeros(model.dim, dtype=np.complex128)
    amps[[lower, lower + 1]] = 1.0 / math.sqrt(2.0)
    return build_microcanonical(StateVector(amps), model)


# -- analytic oracles -------------------------------------------------------


def analytic_oracle(seed: int, dim: int, alpha: float = 1.0, horizon: float = 10.0) -> CheckResult:
    model, psi0, target = _ladder(seed, dim)
    dt = 1e-3
    m = GKSLModel(model, oqt=OQTGenerator(alpha, target))
    rho0 = psi0.projector()
    record = propagate(rho0, m, dt, int(round(horizon / (alpha * dt))), sample_stride=100)
    worst = 0.0
    for t, rho in zip(record.times, record.states):
        exact = analytic_oqt_solution(rho0, target, model, alpha, t)
        worst = max(worst, float(np.max(np.abs(rho.entries - exact.entries))))
    return CheckResult(
        f"analytic_oracle.d{dim}",
        worst <= ORACLE_TOL,
        f"max |RK4 - analytic| = {worst:.2e} over alpha t in [0, {horizon:g}]",
    )


def trace_distance_rate(seed: int, dim: int, alpha: float = 1.0) -> CheckResult:
    model, psi0, target = _ladder(seed, dim)
    dt = 1e-3
    m = GKSLModel(model, oqt=OQTGenerator(alpha, target))
    record = propagate(psi0.projector(), m, dt, int(round(5.0 / (alpha * dt))), sample_stride=10)
    fit = trace_distance_decay_fit(record.times, record.series["trace_distance"])
    rel = abs(fit.rate - 2.0 * alpha) / (2.0 * alpha)
    return CheckResult(
        f"trace_distance_rate.d{dim}",
        rel <= DECAY_REL_TOL,
        f"fitted {fit.rate:.8g} vs 2 alpha = {2.0 * alpha:g} (rel {rel:.1e})",
    )


def entropy_law(seed: int, dim: int, dt: float = 1e-3, horizon: float = 10.0) -> CheckResult:
    model, psi0, target = _ladder(seed, dim)
    stride = max(int(round(0.01 / dt)), 1)
    m = GKSLModel(model, oqt=OQTGenerator(1.0, target))
    record = propagate(psi0.projector(), m, dt, int(round(horizon / dt)), sample_stride=stride)
    report = entropy_law_check(record, target)
    return CheckResult(
        f"entropy_law.d{dim}",
        report.passed(ENTROPY_LAW_TOL),
        f"max relative error {report.max_relative_error:.2e} over {report.n_checked} samples "
        f"(dt={dt:g})",
    )


def entropy_law_convergence(seed: int, dim: int, dt: float = 1e-4) -> CheckResult:
    """Forward differences: halving the sample spacing halves the largest error.

    The absolute error is compared; its maximum sits at the first checked
    sample, which both grids share.
    """
    model, psi0, target = _ladder(seed, dim)
    m = GKSLModel(model, oqt=OQTGenerator(1.0, target))
    errors = []
    for step in (dt, dt / 2.0):
        record = propagate(psi0.projector(), m, step, int(round(5.0 / step)), sample_stride=100)
        report = entropy_law_check(record, target, warmup=0.5, scheme="forward")
        errors.append(float(np.max(np.abs(report.lhs - report.rhs))))
    ratio = errors[1] / errors[0]
    return CheckResult(
        f"entropy_law_convergence.d{dim}",
        0.375 <= ratio <= 0.625,
        f"error {errors[0]:.3e} -> {errors[1]:.3e} under dt halving (ratio {ratio:.3f})",
    )


def equilibrium_entropy(seed: int, dim: int, n_seeds: int = 3) -> CheckResult:
    worst = 0.0
    for s in range(seed, seed + n_seeds):
        model, psi0, target = _ladder(s, dim)
        dt = 1e-3 if dim > 8 else 1e-2
        m = GKSLModel(model, oqt=OQTGenerator(1.0, target))
        record = propagate(psi0.projector(), m, dt, int(round(40.0 / dt)), sample_stride=100)
        entropy = von_neumann_entropy(record.states[-1])
        worst = max(worst, abs(entropy - math.log(target.omega)))
    return CheckResult(
        f"equilibrium_entropy.d{dim}",
        worst <= EQUILIBRIUM_ENTROPY_TOL,
        f"max |S(t_end) - log Omega| = {worst:.2e} over {n_seeds} seeds at alpha t = 40",
    )


def entropy_monotonicity(seed: int, dim: int, horizon: float = 20.0) -> CheckResult:
    """S never decreases from an in-window start; the Gaussian start is reported only."""
    model, psi0, target = _ladder(seed, dim)
    oqt = OQTGenerator(1.0, target)
    generators = {
        "oqt": GKSLModel(model, oqt=oqt),
        "hybrid": GKSLModel(model, oqt=oqt, suv=SUVGenerator.contiguous(dim, 2, 1.0)),
    }
    starts = {"window": restrict_to_window(psi0, target), "gaussian": psi0}
    dt = 1e-3
    details, ok = [], True
    for start, state in starts.items():
        for kind, m in generators.items():
            record = propagate(state.projector(), m, dt, int(round(horizon / dt)), 10)
            report = entropy_monotonicity_check(record, target)
            ok &= report.passed()
            details.append(
                f"{start}/{kind}: min dS {report.min_increment:.1e}, "
                f"overshoot {report.overshoot:.1e}{'' if report.enforced else ' (reported)'}"
            )
    return CheckResult(f"entropy_monotonicity.d{dim}", ok, "; ".join(details))


def steady_state(seed: int, dim: int = 8) -> CheckResult:
    model, psi0, target = _ladder(seed, dim)
    details, ok = [], True
    for alpha, j in STEADY_PAIRS:
        suv = SUVGenerator.contiguous(dim, 2, j)
        m = GKSLModel(model, oqt=OQTGenerator(alpha, target), suv=suv)
        report = hybrid_steady_state(m)
        dt = 0.05 / (alpha + j)
        n_steps = int(round(40.0 / (alpha * dt)))
        record = propagate(psi0.projector(), m, dt, n_steps, sample_stride=1000)
        gap = float(np.max(np.abs(record.states[-1].entries - report.state.entries)))
        ok &= report.residual <= STEADY_RESIDUAL_TOL and gap <= STEADY_MARCH_TOL
        details.append(f"({alpha:g},{j:g}): residual {report.residual:.1e}, march gap {gap:.1e}")
    return CheckResult(f"steady_state.d{dim}", ok, "; ".join(details))


def canonical_steady_state(seed: int, dim: int = 8) -> CheckResult:
    model, _, _ = _ladder(seed, dim)
    target = build_canonical(float(np.percentile(model.energies, 30)), model)
    report = hybrid_steady_state(GKSLModel(model, oqt=OQTGenerator(1.0, target)))
    gap = float(np.max(np.abs(report.state.entries - as_density(target).entries)))
    return CheckResult(
        "canonical_steady_state",
        gap <= STEADY_RESIDUAL_TOL,
        f"beta={target.beta:.6g}, max |rho_inf - chi_beta| = {gap:.1e}",
    )


def rate_constraints(seed: int, dim: int = 8) -> CheckResult:
    model, psi0, target = _ladder(seed, dim)
    rho = psi0.projector()
    rates = product_rates(target.weights, 1.0)
    stationary = float(np.max(np.abs(steady_state_constraint(rates, target.weights))))
    drift = energy_constraint(rates, rho, model)
    expected = float(np.asarray(target.weights) @ model.energies - rho.populations @ model.energies)
    m = GKSLModel(model, oqt=OQTGenerator(1.0, target))
    same = float(np.max(np.abs(generic_rhs(rho, model, rates) - gksl_rhs(rho, m))))
    ok = stationary <= 1e-12 and abs(drift - expected) <= 1e-10 and same <= 1e-12
    return CheckResult(
        "product_rates_constraints",
        ok,
        f"|C_chi|={stationary:.1e}, C_E error {abs(drift - expected):.1e}, rhs gap {same:.1e}",
    )


def sui_reductions(seed: int, dim: int = 8) -> CheckResult:
    model, psi0, target = _ladder(seed, dim)
    dt = 1e-3
    oqt, suv = OQTGenerator(1.0, target), SUVGenerator.contiguous(dim, 2, 1.0)
    a = sui_step(psi0, oqt, SUVGenerator.contiguous(dim, 2, 0.0), model, dt, WienerSource(seed, 1))
    b = oqt_step(psi0, oqt, model, dt, WienerSource(seed, 1))
    c = sui_step(psi0, OQTGenerator(0.0, target), suv, model, dt, WienerSource(seed, 2))
    e = suv_step(psi0, suv, dt, WienerSource(seed, 2), model=model)
    ok = np.array_equal(a.amplitudes, b.amplitudes) and np.array_equal(c.amplitudes, e.amplitudes)
    return CheckResult("sui_reductions_bit_exact", bool(ok), "J=0 vs oqt_step, alpha=0 vs suv_step")


def config_roundtrip(seed: int, dim: int = 8) -> CheckResult:
    bad = []
    for name in ExperimentName:
        config = parse_config({"experiment": name.value, "seed": seed})
        if parse_config(emit_config(config)) != config:
            bad.append(name.value)
    detail = f"mismatched: {bad}" if bad else "all experiments"
    return CheckResult("config_roundtrip", not bad, detail)


# -- mutation tests ---------------------------------------------------------


def _mean_residual(
    gen: OQTGenerator, model: SpectralModel, psi0: StateVector, seed: int, dt: float
) -> float:
    sources = [WienerSource(seed, k) for k in range(200)]
    records = integrate_batch(psi0, [gen], model, dt, 100, sources)
    return float(np.mean([r.step_residuals for r in records]))


def fdr_mutant(seed: int, dim: int = 8) -> CheckResult:
    """The FDR residual invariant passes on the build and fails on the mutant."""
    model, psi0, _ = _ladder(seed, dim)
    target = _pair_target(model, dim // 2 - 1)
    alpha, dt = 4.0, 0.01
    bound = FDR_SHARE * alpha * dt
    correct = _mean_residual(OQTGenerator(alpha, target), model, psi0, seed, dt)
    mutant = _mean_residual(UnsquaredNoiseGenerator(alpha, target), model, psi0, seed, dt)
    ok = abs(correct) <= bound and abs(mutant) > bound
    return CheckResult(
        "fdr_mutant_detected",
        ok,
        f"mean step residual {correct:.2e} (build) vs {mutant:.2e} (mutant), bound {bound:.1e}",
    )


def trace_mutant(seed: int, dim: int = 8) -> CheckResult:
    """Trace preservation on a trace-2 probe passes on the build and fails on the mutant."""
    model, psi0, target = _ladder(seed, dim)
    m = GKSLModel(model, oqt=OQTGenerator(1.0, target))
    probe = DensityMatrix(2.0 * psi0.projector().entries, check=False)
    correct = abs(np.trace(rhs_function(m)(probe.entries)))
    mutant = abs(np.trace(untraced_rhs(m)(probe.entries)))
    ok = correct <= 1e-12 and mutant > 1e-12
    return CheckResult(
        "trace_mutant_detected",
        bool(ok),
        f"|d Tr/dt| on a trace-2 probe: {correct:.1e} (build) vs {mutant:.1e} (mutant)",
    )


def no_signalling(seed: int, dim: int = 4) -> CheckResult:
    report = run_no_signalling(dim, dim, seed=seed)
    ok = report.max_deviation <= WITNESS_TOL and report.mutant_deviation >= MUTANT_MIN_DEVIATION
    return CheckResult(
        "no_signalling",
        ok,
        f"witness {report.max_deviation:.2e}, mutant {report.mutant_deviation:.2e}",
    )


# -- Monte Carlo criteria ---------------------------------------------------


def trajectory_master_consistency(seed: int, workers: int, dim: int = 8) -> CheckResult:
    model, psi0, target = _ladder(seed, dim)
    oqt, suv = OQTGenerator(1.0, target), SUVGenerator.contiguous(dim, 2, 1.0)
    dt, n_steps, stride = 1e-3, 2000, 400
    ensemble = run_trajectory_ensemble(
        psi0, [oqt, suv], model, dt, n_steps, 2000, seed, sample_stride=stride, workers=workers
    )
    record = propagate(psi0.projector(), GKSLModel(model, oqt=oqt, suv=suv), dt, n_steps, stride)
    mean, err_re, err_im = ensemble.mean_projector()
    master = np.stack([rho.entries for rho in record.states])
    fails = (np.abs(mean.real - master.real) > 3.0 * err_re + MC_FLOOR) | (
        np.abs(mean.imag - master.imag) > 3.0 * err_im + MC_FLOOR
    )
    rate = float(np.mean(fails[1:]))
    return CheckResult(
        "trajectory_master_consistency",
        rate <= MC_FAILURE_RATE,
        f"{rate:.2%} of element checks outside 3 sigma at {len(master) - 1} times",
    )


def fdr_dt_scaling(seed: int, workers: int, dim: int = 8) -> CheckResult:
    model, psi0, target = _ladder(seed, dim)
    gen = OQTGenerator(1.0, target)
    means = []
    for dt in (0.01, 0.005):
        ensemble = run_trajectory_ensemble(
            psi0, [gen], model, dt, int(round(1.0 / dt)), 200, seed,
            sample_stride=10, workers=workers,
        )
        means.append(float(np.mean(np.abs(ensemble.step_residuals()))))
    ratio = means[1] / means[0]
    return CheckResult(
        "fdr_dt_scaling",
        0.4 <= ratio <= 0.6,
        f"mean |residual| {means[0]:.3e} -> {means[1]:.3e} (ratio {ratio:.3f}, 200 paired runs)",
    )


def appendix_a(seed: int, workers: int) -> List[CheckResult]:
    config = parse_config({"experiment": ExperimentName.APPENDIX_A.value, "seed": seed})
    return get_experiment(config.experiment)(config, workers=workers).checks


def no_signalling_experiment(seed: int, workers: int) -> List[CheckResult]:
    config = parse_config({"experiment": ExperimentName.NO_SIGNALLING.value, "seed": seed})
    return get_experiment(config.experiment)(config, workers=workers).checks


def fig1(seed: int, workers: int) -> List[CheckResult]:
    return run_fig1(Fig1Scenario(seed=seed, workers=workers)).checks


QUICK_CHECKS: List[Callable[[int], CheckResult]] = [
    lambda s: analytic_oracle(s, 8),
    lambda s: trace_distance_rate(s, 8),
    lambda s: entropy_law(s, 8),
    lambda s: equilibrium_entropy(s, 8),
    lambda s: entropy_monotonicity(s, 8),
    steady_state,
    canonical_steady_state,
    rate_constraints,
    sui_reductions,
    config_roundtrip,
    fdr_mutant,
    trace_mutant,
    no_signalling,
]

FULL_CHECKS: List[Callable[[int, int], List[CheckResult]]] = [
    lambda s, w: [trace_distance_rate(s, 25)],
    lambda s, w: [analytic_oracle(s, 25, horizon=40.0)],
    lambda s, w: [entropy_law(s, 25, dt=1e-4, horizon=5.0), entropy_law_convergence(s, 25)],
    lambda s, w: [equilibrium_entropy(s, 25)],
    lambda s, w: [entropy_monotonicity(s, 25)],
    lambda s, w: [trajectory_master_consistency(s, w)],
    lambda s, w: [fdr_dt_scaling(s, w)],
    no_signalling_experiment,
    appendix_a,
    fig1,
]


def _guarded(name: str, fn: Callable[[], object]) -> List[CheckResult]:
    try:
        out = fn()
    except OQTError as e:
        logger.error(f"Suite check {name} raised", extra={"error": str(e)})
        return [CheckResult(name, False, f"{type(e).__name__}: {e}")]
    return out if isinstance(out, list) else [out]


def suite(
    level: SuiteLevel = SuiteLevel.QUICK,
    out_dir: Path = Path("out"),
    workers: Optional[int] = None,
    seed: int = 0,
    settings: Optional[Config] = None,
) -> RunOutcome:
    """Run the self-test suite; exit code 0 iff every check passed."""
    settings = settings or get_config()
    workers = workers or settings.execution.workers
    level = SuiteLevel(level)

    with LogContext() as ctx:
        logger.info("Suite started", extra={"level": level.value, "seed": seed, "workers": workers})
        checks: List[CheckResult] = []
        for k, check in enumerate(QUICK_CHECKS):
            checks += _guarded(f"quick.{k}", lambda: check(seed))
        if level is SuiteLevel.FULL:
            for k, check in enumerate(FULL_CHECKS):
                checks += _guarded(f"full.{k}", lambda: check(seed, workers))

        provenance: Dict[str, object] = {
            "tool": "oqt-sim",
            "version": __version__,
            "run_id": ctx.rid,
            "suite": level.value,
            "seed": seed,
            "decisions": DECISIONS,
        }
        return finish(Path(out_dir), checks, provenance, settings=settings)
