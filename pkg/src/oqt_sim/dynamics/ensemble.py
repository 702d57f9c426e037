"""GKSL master-equation propagation of ensemble states.

The hybrid generator in the energy eigenbasis is

    d rho / dt = -i [H, rho] + alpha_eff (chi Tr[rho] - rho) + j_eff (Lambda_R(rho))

with Lambda_R zeroing every block between different SUV sectors. Because H and
chi are diagonal and the sectors are unions of basis levels, the right-hand
side is an elementwise product plus a rank-one trace term, which is how
``rhs_function`` evaluates it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from oqt_sim.core.functionals import expectation, trace_distance_sq, von_neumann_entropy
from oqt_sim.core.states import DensityMatrix, Observable, SpectralModel
from oqt_sim.dynamics.generators import OQTGenerator, SUVGenerator, validate_generators
from oqt_sim.errors import ContractViolation, StepSizeError
from oqt_sim.monitoring.metrics import INTEGRATOR_STEPS
from oqt_sim.targets import Target, as_density
from oqt_sim.utils.structured_logging import get_logger
from oqt_sim.utils.validation import PSD_TOL, Validator

logger = get_logger(__name__)

ENSEMBLE_GUARD = 0.05
TRACE_RENORM_TOL = 1e-12
POSITIVITY_FLOOR = -1e-7

Rhs = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class GKSLModel:
    """Spectral model with the generators of the hybrid master equation."""

    model: SpectralModel
    oqt: Optional[OQTGenerator] = None
    suv: Optional[SUVGenerator] = None
    unitary_only: bool = False

    def __post_init__(self):
        if self.oqt is None and self.suv is None and not self.unitary_only:
            raise ContractViolation(
                "GKSLModel needs a generator; pass unitary_only=True for pure unitary evolution"
            )
        if self.unitary_only and (self.oqt is not None or self.suv is not None):
            raise ContractViolation("unitary_only excludes generators")
        validate_generators(self.model.dim, [g for g in (self.oqt, self.suv) if g is not None])

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def alpha_eff(self) -> float:
        return self.oqt.alpha_eff if self.oqt is not None else 0.0

    @property
    def j_eff(self) -> float:
        return self.suv.j_eff if self.suv is not None else 0.0

    @property
    def target(self) -> Optional[Target]:
        return self.oqt.target if self.oqt is not None else None


def rhs_function(m: GKSLModel) -> Rhs:
    """Vectorized right-hand side of the hybrid master equation."""
    energies = m.model.energies
    kernel = -1j * (energies[:, None] - energies[None, :])
    if m.suv is not None:
        kernel = kernel - m.j_eff * (~m.suv.same_sector_mask())
    alpha = m.alpha_eff
    kernel = kernel - alpha

    if m.oqt is None:
        return lambda mat: kernel * mat

    chi = np.diag(m.oqt.chi).astype(np.complex128)

    def rhs(mat: np.ndarray) -> np.ndarray:
        return kernel * mat + (alpha * np.trace(mat)) * chi

    return rhs


def gksl_rhs(rho: DensityMatrix, m: GKSLModel) -> np.ndarray:
    """Time derivative of ``rho`` under the hybrid master equation, as a plain matrix."""
    if rho.dim != m.dim:
        raise ContractViolation(f"state has dimension {rho.dim}, model has {m.dim}")
    return rhs_function(m)(np.asarray(rho.entries))


def rk4_step(mat: np.ndarray, rhs: Rhs, dt: float) -> np.ndarray:
    k1 = rhs(mat)
    k2 = rhs(mat + 0.5 * dt * k1)
    k3 = rhs(mat + 0.5 * dt * k2)
    k4 = rhs(mat + dt * k3)
    return mat + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def march(
    mat0: np.ndarray, rhs: Rhs, dt: float, n_steps: int, sample_stride: int = 1
) -> Iterator[Tuple[int, np.ndarray]]:
    """RK4 with re-Hermitization each step; yields (step, matrix) at sampled steps.

    The trace is renormalized whenever it drifts more than 1e-12 from one.
    """
    mat = np.array(mat0, dtype=np.complex128)
    yield 0, mat.copy()
    for s in range(1, n_steps + 1):
        mat = rk4_step(mat, rhs, dt)
        mat = 0.5 * (mat + mat.conj().T)
        trace = np.trace(mat).real
        if abs(trace - 1.0) > TRACE_RENORM_TOL:
            mat = mat / trace
        if s % sample_stride == 0:
            yield s, mat.copy()
    INTEGRATOR_STEPS.labels(kind="master").inc(n_steps)


def checked_snapshot(mat: np.ndarray, dt: float) -> DensityMatrix:
    """Positivity-checked density matrix; losing positivity means dt is too large."""
    smallest = float(np.linalg.eigvalsh(mat)[0])
    if smallest < POSITIVITY_FLOOR:
        raise StepSizeError(
            f"positivity lost in propagation (eigenvalue {smallest:.3e}); use a smaller dt", dt=dt
        )
    if smallest < -PSD_TOL:
        logger.warning("Snapshot slightly outside the PSD cone", extra={"eigenvalue": smallest})
        return DensityMatrix(mat, check=False)
    return DensityMatrix(mat)


@dataclass
class EnsembleRecord:
    """Sampled master-equation history with its diagnostics."""

    times: np.ndarray
    states: List[DensityMatrix]
    series: Dict[str, np.ndarray]
    observables: Dict[str, np.ndarray] = field(default_factory=dict)
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    @property
    def diagonals(self) -> np.ndarray:
        return self.series["diagonals"]

    def columns(self) -> Dict[str, np.ndarray]:
        """CSV columns: t, observables, scalar diagnostics, diagonal weights."""
        cols: Dict[str, np.ndarray] = {"t": self.times}
        cols.update(self.observables)
        for key, values in self.series.items():
            if values.ndim == 1:
                cols[key] = values
        for i in range(self.diagonals.shape[1]):
            cols[f"p_{i}"] = self.diagonals[:, i]
        return cols


def propagate(
    rho0: DensityMatrix,
    m: GKSLModel,
    dt: float,
    n_steps: int,
    sample_stride: int = 1,
    observables: Sequence[Observable] = (),
    target: Optional[Target] = None,
) -> EnsembleRecord:
    """RK4 propagation of the master equation, sampling every ``sample_stride`` steps."""
    if rho0.dim != m.dim:
        raise ContractViolation(f"state has dimension {rho0.dim}, model has {m.dim}")
    if n_steps < 0 or sample_stride < 1:
        raise ContractViolation("n_steps must be >= 0 and sample_stride >= 1")
    guard = Validator.validate_step(
        dt, m.alpha_eff + m.j_eff, ENSEMBLE_GUARD, f"(alpha_eff+j_eff)*dt <= {ENSEMBLE_GUARD}"
    )
    if not guard.is_valid:
        raise StepSizeError(guard.error_message, dt=dt)
    for obs in observables:
        if obs.dim != m.dim:
            raise ContractViolation(f"observable '{obs.label}' has dimension {obs.dim}")

    target = target if target is not None else m.target
    chi = as_density(target) if target is not None else None
    energies_obs = Observable.diagonal(m.model.energies, "H")

    times, states = [], []
    entropy, distance, energy, purity, diagonals, sectors = [], [], [], [], [], []
    obs_values: Dict[str, list] = {obs.label: [] for obs in observables}

    for step, mat in march(rho0.entries, rhs_function(m), dt, n_steps, sample_stride):
        rho = checked_snapshot(mat, dt)
        times.append(step * dt)
        states.append(rho)
        entropy.append(von_neumann_entropy(rho))
        energy.append(expectation(rho, energies_obs))
        purity.append(rho.purity())
        diagonals.append(rho.populations)
        if chi is not None:
            distance.append(trace_distance_sq(rho, chi))
        if m.suv is not None:
            sectors.append(m.suv.sector_weights(rho.populations))
        for obs in observables:
            obs_values[obs.label].append(expectation(rho, obs))

    series = {
        "entropy": np.array(entropy),
        "energy": np.array(energy),
        "purity": np.array(purity),
        "diagonals": np.array(diagonals),
    }
    if chi is not None:
        series["trace_distance"] = np.array(distance)
    if m.suv is not None:
        series["sector_populations"] = np.array(sectors)

    return EnsembleRecord(
        times=np.array(times),
        states=states,
        series=series,
        observables={label: np.array(v) for label, v in obs_values.items()},
        meta={"dt": dt, "alpha_eff": m.alpha_eff, "j_eff": m.j_eff, "n_steps": n_steps},
    )


def analytic_oqt_solution(
    rho0: DensityMatrix,
    target: Target,
    model: SpectralModel,
    alpha_eff: float,
    t: float,
) -> DensityMatrix:
    """Closed-form OQT state exp(-a t) U rho0 U^dag + (1 - exp(-a t)) chi.

    Valid because chi commutes with the diagonal Hamiltonian.
    """
    if rho0.dim != model.dim or target.dim != model.dim:
        raise ContractViolation("state, target and model dimensions differ")
    if t < 0:
        raise ContractViolation("t must be >= 0")
    if t == 0:
        return rho0

    energies = model.energies
    phases = np.exp(-1j * (energies[:, None] - energies[None, :]) * t)
    relaxed = -np.expm1(-alpha_eff * t)
    mat = np.exp(-alpha_eff * t) * phases * rho0.entries + relaxed * np.diag(
        np.asarray(target.weights, dtype=np.float64)
    )
    mat = 0.5 * (mat + mat.conj().T)
    return DensityMatrix(mat, rho0.basis_tag)
