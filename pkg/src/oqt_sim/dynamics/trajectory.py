"""Ito stochastic Schroedinger integration of single trajectories.

Every step is Euler-Maruyama in the energy eigenbasis: the OQT and SUV
increments are evaluated at psi, added to it, the unitary part is applied as
exact phases exp(-i E dt), and the result is renormalized. The norm before
renormalization is kept as the FDR diagnostic.

The kernel works on batches of shape (n, d) so an ensemble worker can push
many trajectories through one step at once. Per step, OQT channels are drawn
before SUV channels; a generator with zero coupling draws nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from oqt_sim.core.states import Observable, SpectralModel, StateVector
from oqt_sim.dynamics.generators import OQTGenerator, SUVGenerator, validate_generators
from oqt_sim.dynamics.noise import WienerSource
from oqt_sim.errors import ContractViolation, StepSizeError
from oqt_sim.monitoring.metrics import INTEGRATOR_STEPS
from oqt_sim.utils.structured_logging import get_logger
from oqt_sim.utils.validation import Validator

logger = get_logger(__name__)

STEP_GUARD = 0.1
NORM_DRIFT_FACTOR = 10.0
NORM_DRIFT_FLOOR = 1e-12
DEFAULT_NOISE_BLOCK = 256


def _guard(dt: float, rate: float, name: str) -> float:
    result = Validator.validate_step(dt, rate, STEP_GUARD, name)
    if not result.is_valid:
        raise StepSizeError(result.error_message, dt=dt)
    return result.value


def _split_generators(
    generators: Sequence[object],
) -> Tuple[Optional[OQTGenerator], Optional[SUVGenerator]]:
    oqt: Optional[OQTGenerator] = None
    suv: Optional[SUVGenerator] = None
    for gen in generators:
        if isinstance(gen, OQTGenerator):
            if oqt is not None:
                raise ContractViolation("at most one OQT generator per trajectory")
            oqt = gen
        elif isinstance(gen, SUVGenerator):
            if suv is not None:
                raise ContractViolation("at most one SUV generator per trajectory")
            suv = gen
        else:
            raise ContractViolation(f"unsupported generator {type(gen).__name__}")
    return oqt, suv


def _n_channels(oqt: Optional[OQTGenerator], suv: Optional[SUVGenerator]) -> int:
    return (oqt.n_channels if oqt is not None else 0) + (suv.n_channels if suv is not None else 0)


def oqt_increment(
    psi: np.ndarray, gen: OQTGenerator, dw: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Noise increment and drift rate of the OQT generator.

    ``psi`` has shape (n, d), ``dw`` shape (n, Omega * d) in channel order.
    """
    n, d = psi.shape
    members = gen.members
    amp = gen.noise_amplitudes
    rates = gen.rates

    xi = dw.reshape(n, members.size, d)
    y = amp[None, :] * np.sum(xi * psi[:, None, :], axis=-1)

    noise = np.zeros_like(psi)
    noise[:, members] = y
    noise -= psi * np.sum(np.conj(psi[:, members]) * y, axis=-1)[:, None]

    pops = np.abs(psi) ** 2
    mean_rate = np.sum(pops * rates[None, :], axis=-1)
    drift = rates[None, :] * psi - 0.5 * gen.alpha_eff * psi - 0.5 * mean_rate[:, None] * psi
    return noise, drift


def suv_increment(
    psi: np.ndarray, gen: SUVGenerator, dw: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Noise increment and drift rate of the SUV generator, ``dw`` of shape (n, K)."""
    labels = gen.labels
    z = gen.sector_weights(np.abs(psi) ** 2)

    centre = np.sum(z * dw, axis=-1)
    noise = np.sqrt(gen.j_eff) * (dw[:, labels] - centre[:, None]) * psi

    z_sq = np.sum(z**2, axis=-1)
    drift = -0.5 * gen.j_eff * ((1.0 - 2.0 * z[:, labels]) + z_sq[:, None]) * psi
    return noise, drift


def advance(
    psi: np.ndarray,
    energies: Optional[np.ndarray],
    dt: float,
    oqt: Optional[OQTGenerator],
    suv: Optional[SUVGenerator],
    dw: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """One Euler-Maruyama step for a batch; returns (psi_next, signed norm residual)."""
    step = psi
    offset = 0
    total_rate = 0.0

    if oqt is not None and oqt.active:
        width = oqt.n_channels
        noise, drift = oqt_increment(psi, oqt, dw[:, offset : offset + width])
        step = step + noise + drift * dt
        offset += width
        total_rate += oqt.alpha_eff

    if suv is not None and suv.active:
        width = suv.n_channels
        noise, drift = suv_increment(psi, suv, dw[:, offset : offset + width])
        step = step + noise + drift * dt
        offset += width
        total_rate += suv.j_eff

    if energies is not None:
        step = np.exp(-1j * energies * dt)[None, :] * step

    norm_sq = np.sum(np.abs(step) ** 2, axis=-1)
    residual = norm_sq - 1.0

    bound = max(NORM_DRIFT_FACTOR * np.sqrt(dt) * total_rate, NORM_DRIFT_FLOOR)
    worst = float(np.max(np.abs(residual)))
    if worst > bound:
        raise StepSizeError(
            f"norm drift {worst:.3e} exceeds {bound:.3e} in one step; use a smaller dt", dt=dt
        )

    return step / np.sqrt(norm_sq)[:, None], residual


def _single_step(
    psi: StateVector,
    model: Optional[SpectralModel],
    dt: float,
    oqt: Optional[OQTGenerator],
    suv: Optional[SUVGenerator],
    noise: WienerSource,
) -> StateVector:
    psi.require_normalized()
    if oqt is not None:
        _guard(dt, oqt.alpha_eff, "alpha_eff*dt <= 0.1")
    if suv is not None:
        _guard(dt, suv.j_eff, "j_eff*dt <= 0.1")
    validate_generators(psi.dim, [g for g in (oqt, suv) if g is not None])
    if model is not None and model.dim != psi.dim:
        raise ContractViolation(f"state has dimension {psi.dim}, model has {model.dim}")

    dw = noise.block(1, _n_channels(oqt, suv), dt)
    energies = model.energies if model is not None else None
    nxt, _ = advance(psi.amplitudes[None, :], energies, dt, oqt, suv, dw)
    INTEGRATOR_STEPS.labels(kind="trajectory").inc()
    return StateVector(nxt[0], psi.basis_tag)


def oqt_step(
    psi: StateVector, gen: OQTGenerator, model: SpectralModel, dt: float, noise: WienerSource
) -> StateVector:
    """One OQT step; consumes Omega * d increments when alpha_eff > 0."""
    return _single_step(psi, model, dt, gen, None, noise)


def suv_step(
    psi: StateVector,
    gen: SUVGenerator,
    dt: float,
    noise: WienerSource,
    model: Optional[SpectralModel] = None,
) -> StateVector:
    """One SUV step; without a model no unitary phase is applied."""
    return _single_step(psi, model, dt, None, gen, noise)


def sui_step(
    psi: StateVector,
    oqt: OQTGenerator,
    suv: SUVGenerator,
    model: SpectralModel,
    dt: float,
    noise: WienerSource,
) -> StateVector:
    """One hybrid step with both generators' increments added before renormalizing."""
    return _single_step(psi, model, dt, oqt, suv, noise)


@dataclass
class TrajectoryRecord:
    """Sampled time series of one trajectory.

    ``expectations`` are aligned with ``times``; an observer with a coarser
    stride holds NaN at the samples it skips. ``norm_residual`` is the signed
    residual of the step that produced each sample (0 at t = 0) and
    ``step_residuals`` holds it for every step.
    """

    seed: int
    stream_id: int
    dt: float
    times: np.ndarray
    expectations: Dict[str, np.ndarray]
    norm_residual: np.ndarray
    step_residuals: np.ndarray
    energy_mean: np.ndarray
    energy_var: np.ndarray
    populations: np.ndarray
    amplitudes: np.ndarray
    sector_weights: Optional[np.ndarray] = None
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    def columns(self) -> Dict[str, np.ndarray]:
        """CSV columns: t, observables, norm_residual, E_mean, E_var, sector weights."""
        cols: Dict[str, np.ndarray] = {"t": self.times}
        for label, values in self.expectations.items():
            cols[label] = values
        cols["norm_residual"] = self.norm_residual
        cols["E_mean"] = self.energy_mean
        cols["E_var"] = self.energy_var
        if self.sector_weights is not None:
            for k in range(self.sector_weights.shape[1]):
                cols[f"z_{k}"] = self.sector_weights[:, k]
        return cols


def _sample_grid(n_steps: int, sample_stride: int) -> np.ndarray:
    return np.arange(0, n_steps + 1, sample_stride)


def integrate_batch(
    psi0: StateVector,
    generators: Sequence[object],
    model: SpectralModel,
    dt: float,
    n_steps: int,
    sources: Sequence[WienerSource],
    observers: Sequence[Tuple[Observable, int]] = (),
    sample_stride: int = 1,
    noise_block: int = DEFAULT_NOISE_BLOCK,
) -> List[TrajectoryRecord]:
    """Integrate one trajectory per Wiener source from the same initial state."""
    if n_steps < 0:
        raise ContractViolation("n_steps must be >= 0")
    if sample_stride < 1:
        raise ContractViolation("sample_stride must be >= 1")
    if not sources:
        raise ContractViolation("at least one Wiener source is required")
    psi0.require_normalized()
    if psi0.dim != model.dim:
        raise ContractViolation(f"state has dimension {psi0.dim}, model has {model.dim}")

    oqt, suv = _split_generators(generators)
    present = [g for g in (oqt, suv) if g is not None]
    validate_generators(model.dim, present)
    if oqt is not None:
        _guard(dt, oqt.alpha_eff, "alpha_eff*dt <= 0.1")
    if suv is not None:
        _guard(dt, suv.j_eff, "j_eff*dt <= 0.1")

    for obs, stride in observers:
        if obs.dim != model.dim:
            raise ContractViolation(f"observer '{obs.label}' has dimension {obs.dim}")
        if stride < 1 or stride % sample_stride:
            raise ContractViolation(
                f"observer stride {stride} must be a positive multiple "
                f"of sample_stride {sample_stride}"
            )

    n = len(sources)
    d = model.dim
    energies = model.energies
    grid = _sample_grid(n_steps, sample_stride)
    n_samples = grid.size
    n_channels = _n_channels(oqt, suv)

    psi = np.repeat(psi0.amplitudes[None, :], n, axis=0)
    step_res = np.zeros((n, n_steps))
    samples_res = np.zeros((n, n_samples))
    pops = np.zeros((n, n_samples, d))
    amps = np.zeros((n, n_samples, d), dtype=np.complex128)
    expect = {obs.label: np.full((n, n_samples), np.nan) for obs, _ in observers}

    def record(slot: int, step_index: int, state: np.ndarray) -> None:
        amps[:, slot] = state
        pops[:, slot] = np.abs(state) ** 2
        for obs, stride in observers:
            if step_index % stride == 0:
                value = np.sum(np.conj(state) * (state @ obs.matrix.T), axis=-1)
                expect[obs.label][:, slot] = value.real

    record(0, 0, psi)
    slot = 1
    block: np.ndarray = np.zeros((n, 0, n_channels))
    for s in range(n_steps):
        offset = s % noise_block
        if offset == 0:
            steps = min(noise_block, n_steps - s)
            block = np.stack([src.block(steps, n_channels, dt) for src in sources])
        psi, res = advance(psi, energies, dt, oqt, suv, block[:, offset])
        step_res[:, s] = res
        if (s + 1) % sample_stride == 0:
            samples_res[:, slot] = res
            record(slot, s + 1, psi)
            slot += 1

    INTEGRATOR_STEPS.labels(kind="trajectory").inc(n * n_steps)

    times = grid * dt
    energy_mean = pops @ energies
    energy_var = np.maximum(pops @ energies**2 - energy_mean**2, 0.0)
    sector = suv.sector_weights(pops) if suv is not None else None

    records = []
    for i, src in enumerate(sources):
        records.append(
            TrajectoryRecord(
                seed=src.seed,
                stream_id=src.stream_id,
                dt=dt,
                times=times,
                expectations={label: values[i] for label, values in expect.items()},
                norm_residual=samples_res[i],
                step_residuals=step_res[i],
                energy_mean=energy_mean[i],
                energy_var=energy_var[i],
                populations=pops[i],
                amplitudes=amps[i],
                sector_weights=sector[i] if sector is not None else None,
            )
        )
    return records


def integrate_trajectory(
    psi0: StateVector,
    generators: Sequence[object],
    model: SpectralModel,
    dt: float,
    n_steps: int,
    noise: WienerSource,
    observers: Sequence[Tuple[Observable, int]] = (),
    sample_stride: int = 1,
) -> TrajectoryRecord:
    """Integrate one trajectory; deterministic given the source's (seed, stream_id)."""
    (rec,) = integrate_batch(
        psi0, generators, model, dt, n_steps, [noise], observers, sample_stride
    )
    logger.debug(
        "Trajectory integrated",
        extra={"seed": noise.seed, "stream_id": noise.stream_id, "n_steps": n_steps},
    )
    return rec
