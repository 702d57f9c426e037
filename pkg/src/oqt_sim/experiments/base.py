"""Shared result type and scenario builders for the experiments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from oqt_sim.artifacts.writers import CheckResult
from oqt_sim.config.scenario import ObservableKind, ObservableSpec
from oqt_sim.core.states import Observable, SpectralModel, StateVector
from oqt_sim.errors import ConfigurationError, ContractViolation
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

# Independent random streams derived from one seed
STREAM_SPECTRUM = 1
STREAM_STATE = 2
STREAM_OBSERVABLE = 3


@dataclass
class ExperimentResult:
    """What every experiment hands back to the runner."""

    name: str
    checks: List[CheckResult] = field(default_factory=list)
    curves: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)
    report: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = "") -> CheckResult:
        result = CheckResult(name, bool(passed), detail)
        self.checks.append(result)
        log = logger.info if result.passed else logger.warning
        log(f"{result.status} {name}", extra={"detail": detail})
        return result


def rng_for(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream)])


def sample_level_gaps(
    seed: int,
    dim: int = 25,
    spectrum_range: Tuple[float, float] = (0.0, 10.0),
    spacing_std: float = 0.01,
) -> np.ndarray:
    """The raw level gaps: Normal(range / (dim - 1), spacing_std), before truncation."""
    if dim < 2:
        return np.zeros(0)
    low, high = spectrum_range
    mean_gap = (high - low) / (dim - 1)
    return rng_for(seed, STREAM_SPECTRUM).normal(mean_gap, spacing_std, size=dim - 1)


def build_fig1_hamiltonian(
    seed: int,
    dim: int = 25,
    spectrum_range: Tuple[float, float] = (0.0, 10.0),
    spacing_std: float = 0.01,
) -> SpectralModel:
    """Random ladder with regular mean spacing, rescaled onto ``spectrum_range``.

    Gaps below 1e-6 are truncated to 1e-6 so the spectrum stays sorted.
    """
    low, high = spectrum_range
    if dim == 1:
        return SpectralModel(np.array([low]))
    gaps = np.maximum(sample_level_gaps(seed, dim, spectrum_range, spacing_std), 1e-6)
    levels = np.concatenate(([0.0], np.cumsum(gaps)))
    energies = low + levels * ((high - low) / levels[-1])
    energies[0], energies[-1] = low, high
    return SpectralModel(energies)


def build_fig1_state(
    model: SpectralModel,
    seed: int,
    center: float = 0.6,
    width: float = 0.2,
    random_phases: bool = True,
) -> StateVector:
    """Gaussian amplitude profile in energy with optional uniform random phases.

    The mean sits at ``center`` and the probability profile has standard
    deviation ``width``, both as fractions of the spectral range.
    """
    if width <= 0:
        raise ContractViolation("state width must be > 0")
    energies = model.energies
    span = model.bandwidth or 1.0
    mean = energies[0] + center * span
    sigma = width * span

    log_amp = -((energies - mean) ** 2) / (4.0 * sigma**2)
    amplitudes = np.exp(log_amp - log_amp.max()).astype(np.complex128)
    if random_phases:
        phases = rng_for(seed, STREAM_STATE).uniform(0.0, 2.0 * np.pi, size=model.dim)
        amplitudes = amplitudes * np.exp(1j * phases)
    amplitudes /= np.sqrt(np.sum(np.abs(amplitudes) ** 2))
    return StateVector(amplitudes)


def coherence_observable(dim: int, i: int, j: int, label: Optional[str] = None) -> Observable:
    """|i><j| + |j><i|."""
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise ConfigurationError(
            f"coherence pair ({i}, {j}) must be two distinct levels in 0..{dim - 1}"
        )
    mat = np.zeros((dim, dim), dtype=np.complex128)
    mat[i, j] = mat[j, i] = 1.0
    return Observable(mat, label or f"O1_{i}_{j}")


def random_observable(dim: int, seed: int, label: str = "O2") -> Observable:
    """Hermitian part of a complex Ginibre matrix, scaled to spectral radius 1."""
    rng = rng_for(seed, STREAM_OBSERVABLE)
    ginibre = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    herm = 0.5 * (ginibre + ginibre.conj().T)
    radius = float(np.max(np.abs(np.linalg.eigvalsh(herm))))
    return Observable(herm / radius, label)


def build_observables(
    model: SpectralModel,
    members: Sequence[int],
    pair: Optional[Tuple[int, int]] = None,
    seed: int = 0,
) -> Tuple[Observable, Observable]:
    """The non-ETH coherence observable on a pair inside W and a random observable."""
    members = list(members)
    if pair is None:
        if len(members) < 2:
            raise ConfigurationError(
                "the window has fewer than two levels; no coherence pair exists"
            )
        pair = (members[0], members[-1])
    i, j = pair
    if i not in members or j not in members:
        raise ConfigurationError(f"observable pair ({i}, {j}) is not inside the window {members}")
    return coherence_observable(model.dim, i, j, "O1"), random_observable(model.dim, seed, "O2")


def curve(times: np.ndarray, **series: np.ndarray) -> Dict[str, np.ndarray]:
    columns: Dict[str, np.ndarray] = {"t": np.asarray(times)}
    columns.update({k: np.asarray(v) for k, v in series.items()})
    return columns


def fraction_within(
    values: np.ndarray,
    reference: np.ndarray,
    stderr: np.ndarray,
    sigmas: float = 3.0,
    floor: float = 1e-12,
) -> float:
    """Share of entries with |values - reference| <= sigmas * stderr + floor."""
    ok = np.abs(np.asarray(values) - np.asarray(reference)) <= sigmas * np.asarray(stderr) + floor
    return float(np.mean(ok))


def resolve_observable(spec: ObservableSpec, model: SpectralModel, seed: int) -> Observable:
    """Build the observable a config entry describes."""
    kind = spec.kind
    if kind is ObservableKind.COHERENCE:
        i, j = spec.pair
        return coherence_observable(model.dim, i, j, spec.label)
    if kind is ObservableKind.RANDOM:
        draw = spec.seed if spec.seed is not None else seed
        return random_observable(model.dim, draw, spec.label or f"random_{draw}")
    if kind is ObservableKind.POPULATION:
        if spec.index >= model.dim:
            raise ConfigurationError(f"population index {spec.index} outside 0..{model.dim - 1}")
        values = np.zeros(model.dim)
        values[spec.index] = 1.0
        return Observable.diagonal(values, spec.label or f"p_{spec.index}")
    return Observable.diagonal(model.energies, spec.label or "H")
