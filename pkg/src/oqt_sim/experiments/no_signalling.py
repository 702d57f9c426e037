"""No-signalling protocol: a local OQT generator on A must leave B's reduced state alone.

The joint system has no interaction, so B's reduced state can only follow
its own free evolution. The witness is the largest Frobenius distance
between the propagated rho_B(t) and U_B(t) rho_B(0) U_B(t)^dag. A mutant
with a nonlinear deterministic drift on the joint pure state is run beside
it to show the witness does detect signalling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

import numpy as np

from oqt_sim.config.scenario import ScenarioConfig
from oqt_sim.core.functionals import Subsystem, partial_trace
from oqt_sim.core.states import DensityMatrix, SpectralModel, StateVector
from oqt_sim.dynamics.ensemble import ENSEMBLE_GUARD, march, rk4_step
from oqt_sim.errors import ContractViolation, StepSizeError
from oqt_sim.experiments.base import STREAM_SPECTRUM, ExperimentResult, curve, rng_for
from oqt_sim.targets.microcanonical import MicrocanonicalTarget, build_microcanonical
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

WITNESS_TOL = 1e-9
MUTANT_MIN_DEVIATION = 1e-3


@dataclass
class NoSignallingReport:
    max_deviation: float
    max_deviation_from_initial: float
    mutant_deviation: float
    alpha_eff: float
    target: MicrocanonicalTarget
    times: np.ndarray
    deviation: np.ndarray
    mutant_curve: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_deviation": self.max_deviation,
            "max_deviation_from_initial": self.max_deviation_from_initial,
            "mutant_deviation": self.mutant_deviation,
            "alpha_eff": self.alpha_eff,
            "target_A": self.target.to_dict(),
        }


def local_spectra(seed: int, d_a: int, d_b: int) -> tuple[SpectralModel, SpectralModel]:
    """Random nondegenerate local spectra, sorted uniform draws on [0, d)."""
    rng = rng_for(seed, STREAM_SPECTRUM)
    e_a = np.sort(rng.uniform(0.0, d_a, size=d_a))
    e_b = np.sort(rng.uniform(0.0, d_b, size=d_b))
    return SpectralModel(e_a, basis_tag="energy_A"), SpectralModel(e_b, basis_tag="energy_B")


def maximally_entangled(d_a: int, d_b: int) -> StateVector:
    """sum_i |i>|i> / sqrt(min(d_a, d_b))."""
    d = min(d_a, d_b)
    psi = np.zeros(d_a * d_b, dtype=np.complex128)
    for i in range(d):
        psi[i * d_b + i] = 1.0
    return StateVector(psi / np.sqrt(d))


def _joint_rhs(model_a: SpectralModel, model_b: SpectralModel, chi_a: np.ndarray, alpha: float):
    d_a, d_b = model_a.dim, model_b.dim
    energies = (model_a.energies[:, None] + model_b.energies[None, :]).reshape(-1)
    kernel = -1j * (energies[:, None] - energies[None, :]) - alpha
    chi = np.diag(chi_a).astype(np.complex128)

    def rhs(mat: np.ndarray) -> np.ndarray:
        reduced_b = np.einsum("abac->bc", mat.reshape(d_a, d_b, d_a, d_b))
        return kernel * mat + alpha * np.kron(chi, reduced_b)

    return rhs


def _free_evolution(rho_b: np.ndarray, energies: np.ndarray, t: float) -> np.ndarray:
    return np.exp(-1j * (energies[:, None] - energies[None, :]) * t) * rho_b


def _mutant_deviation(
    psi0: StateVector,
    model_a: SpectralModel,
    model_b: SpectralModel,
    rates: np.ndarray,
    alpha: float,
    dt: float,
    n_steps: int,
    sample_stride: int,
) -> np.ndarray:
    """Witness curve of the drift-only joint dynamics with uncancelled nonlinear terms."""
    d_a, d_b = model_a.dim, model_b.dim
    e_a, e_b = model_a.energies, model_b.energies

    def drift(psi: np.ndarray) -> np.ndarray:
        r = psi @ psi.conj().T
        mean_rate = float(np.sum(rates[None, :] * np.abs(r) ** 2))
        unitary = -1j * (e_a[:, None] * psi + psi * e_b[None, :])
        return unitary + rates[:, None] * (r @ psi) - 0.5 * alpha * psi - 0.5 * mean_rate * psi

    psi = psi0.amplitudes.reshape(d_a, d_b).astype(np.complex128)
    rho_b0 = psi.T @ psi.conj()
    out = [0.0]
    for s in range(1, n_steps + 1):
        psi = rk4_step(psi, drift, dt)
        psi = psi / np.linalg.norm(psi)
        if s % sample_stride == 0:
            rho_b = psi.T @ psi.conj()
            out.append(float(np.linalg.norm(rho_b - _free_evolution(rho_b0, e_b, s * dt))))
    return np.array(out)


def run_no_signalling(
    d_a: int = 4,
    d_b: int = 4,
    entangled_state: Optional[Union[StateVector, DensityMatrix]] = None,
    alpha_eff: float = 1.0,
    dt: float = 1e-3,
    n_steps: int = 2000,
    seed: int = 0,
    sample_stride: int = 10,
    run_mutant: bool = True,
) -> NoSignallingReport:
    """Propagate the joint state under H_A + H_B and a local OQT generator on A."""
    if alpha_eff * dt > ENSEMBLE_GUARD:
        raise StepSizeError(
            f"stability guard (alpha_eff+j_eff)*dt <= {ENSEMBLE_GUARD} violated", dt=dt
        )
    if n_steps < 0 or sample_stride < 1:
        raise ContractViolation("n_steps must be >= 0 and sample_stride >= 1")

    model_a, model_b = local_spectra(seed, d_a, d_b)
    state = entangled_state if entangled_state is not None else maximally_entangled(d_a, d_b)
    if state.dim != d_a * d_b:
        raise ContractViolation(f"joint state has dimension {state.dim}, expected {d_a * d_b}")
    rho0 = state.projector() if isinstance(state, StateVector) else state

    rho_a0 = partial_trace(rho0, (d_a, d_b), Subsystem.A)
    rho_b0 = partial_trace(rho0, (d_a, d_b), Subsystem.B).entries
    target = build_microcanonical(rho_a0, model_a)
    chi_a = np.asarray(target.weights, dtype=np.float64)

    times, deviation, from_initial = [], [], []
    rhs = _joint_rhs(model_a, model_b, chi_a, alpha_eff)
    for step, mat in march(rho0.entries, rhs, dt, n_steps, sample_stride):
        t = step * dt
        rho_b = np.einsum("abac->bc", mat.reshape(d_a, d_b, d_a, d_b))
        times.append(t)
        free = _free_evolution(rho_b0, model_b.energies, t)
        deviation.append(float(np.linalg.norm(rho_b - free)))
        from_initial.append(float(np.linalg.norm(rho_b - rho_b0)))

    mutant = np.zeros(0)
    if run_mutant:
        if isinstance(state, StateVector):
            psi0 = state
        else:
            _, vecs = np.linalg.eigh(state.entries)
            psi0 = StateVector(vecs[:, -1])
        mutant = _mutant_deviation(
            psi0, model_a, model_b, alpha_eff * chi_a, alpha_eff, dt, n_steps, sample_stride
        )

    report = NoSignallingReport(
        max_deviation=float(np.max(deviation)),
        max_deviation_from_initial=float(np.max(from_initial)),
        mutant_deviation=float(np.max(mutant)) if mutant.size else float("nan"),
        alpha_eff=alpha_eff,
        target=target,
        times=np.array(times),
        deviation=np.array(deviation),
        mutant_curve=mutant,
    )
    logger.info(
        "No-signalling witness",
        extra={"max_deviation": report.max_deviation, "mutant_deviation": report.mutant_deviation},
    )
    return report


def from_config(config: ScenarioConfig, workers: int = 1, **execution: Any) -> ExperimentResult:
    result = ExperimentResult("no_signalling")
    kwargs = dict(
        d_a=config.dim_a,
        d_b=config.dim_b,
        dt=config.dt,
        n_steps=config.n_steps,
        seed=config.seed,
        sample_stride=config.sample_stride,
    )
    report = run_no_signalling(alpha_eff=config.alpha_eff, **kwargs)
    doubled = run_no_signalling(alpha_eff=2.0 * config.alpha_eff, run_mutant=False, **kwargs)

    result.check(
        "no_signalling.witness",
        report.max_deviation <= WITNESS_TOL,
        f"max ||rho_B(t) - U_B rho_B(0) U_B^dag||_F = {report.max_deviation:.3e}",
    )
    result.check(
        "no_signalling.mutant_detected",
        report.mutant_deviation >= MUTANT_MIN_DEVIATION,
        f"mutant deviation {report.mutant_deviation:.3e}",
    )
    change = abs(doubled.max_deviation - report.max_deviation)
    result.check(
        "no_signalling.alpha_independent",
        change <= max(report.max_deviation, 1e-12),
        f"doubling alpha_eff changes the witness by {change:.3e}",
    )

    result.curves["no_signalling_witness"] = curve(
        report.times, deviation=report.deviation, mutant=report.mutant_curve
    )
    result.report = {"witness": report.to_dict(), "doubled_alpha_deviation": doubled.max_deviation}
    return result
