"""Trajectory ensembles integrated in batches across a process pool."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from oqt_sim.core.states import Observable, SpectralModel, StateVector
from oqt_sim.dynamics.noise import WienerSource
from oqt_sim.dynamics.trajectory import (
    DEFAULT_NOISE_BLOCK,
    TrajectoryRecord,
    integrate_batch,
)
from oqt_sim.errors import ContractViolation
from oqt_sim.monitoring.metrics import TRAJECTORIES_COMPLETED
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)


def exact_sum(stack: np.ndarray) -> np.ndarray:
    """Correctly rounded sum over axis 0, whatever the order of the terms.

    Complex input is summed on its real and imaginary parts separately.
    """
    stack = np.asarray(stack)
    if np.iscomplexobj(stack):
        return exact_sum(stack.real) + 1j * exact_sum(stack.imag)
    return np.apply_along_axis(math.fsum, 0, stack.astype(np.float64, copy=False))


@dataclass
class TrajectoryEnsemble:
    """Stream-ordered records of an ensemble and their reductions."""

    seed: int
    records: List[TrajectoryRecord]

    @property
    def n_trajectories(self) -> int:
        return len(self.records)

    @property
    def times(self) -> np.ndarray:
        return self.records[0].times

    def populations(self) -> np.ndarray:
        """Shape (n_trajectories, n_samples, d)."""
        return np.stack([r.populations for r in self.records])

    def sector_weights(self) -> Optional[np.ndarray]:
        if self.records[0].sector_weights is None:
            return None
        return np.stack([r.sector_weights for r in self.records])

    def energy_means(self) -> np.ndarray:
        return np.stack([r.energy_mean for r in self.records])

    def step_residuals(self) -> np.ndarray:
        return np.stack([r.step_residuals for r in self.records])

    def mean(self, values: np.ndarray) -> np.ndarray:
        return exact_sum(values) / values.shape[0]

    def mean_projector(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Mean of |psi><psi| at every sample with elementwise standard errors.

        Returns (mean, stderr_real, stderr_imag), each of shape (n_samples, d, d).
        """
        amps = np.stack([r.amplitudes for r in self.records])
        projectors = amps[..., :, None] * np.conj(amps[..., None, :])
        n = projectors.shape[0]
        mean = self.mean(projectors)

        dev = projectors - mean[None]
        var_re = exact_sum(dev.real**2) / max(n - 1, 1)
        var_im = exact_sum(dev.imag**2) / max(n - 1, 1)
        return mean, np.sqrt(var_re / n), np.sqrt(var_im / n)

    def mean_expectation(self, label: str) -> Tuple[np.ndarray, np.ndarray]:
        values = np.stack([r.expectations[label] for r in self.records])
        n = values.shape[0]
        mean = self.mean(values)
        stderr = np.sqrt(exact_sum((values - mean) ** 2) / max(n - 1, 1) / n)
        return mean, stderr


def _run_batch(args) -> List[TrajectoryRecord]:
    psi0, generators, model, dt, n_steps, seed, start, stop, observers, stride, block = args
    sources = [WienerSource(seed, stream_id) for stream_id in range(start, stop)]
    return integrate_batch(
        psi0, generators, model, dt, n_steps, sources, observers, stride, block
    )


def run_trajectory_ensemble(
    psi0: StateVector,
    generators: Sequence[object],
    model: SpectralModel,
    dt: float,
    n_steps: int,
    n_trajectories: int,
    seed: int,
    observers: Sequence[Tuple[Observable, int]] = (),
    sample_stride: int = 1,
    workers: int = 1,
    batch_size: int = 250,
    noise_block: int = DEFAULT_NOISE_BLOCK,
) -> TrajectoryEnsemble:
    """Integrate trajectories 0..n_trajectories-1, stream_id = trajectory index.

    Batches are cut from the trajectory index range, so the worker count
    only decides where a batch runs; results are gathered in stream order.
    """
    if n_trajectories < 1:
        raise ContractViolation("n_trajectories must be >= 1")
    if workers < 1 or batch_size < 1:
        raise ContractViolation("workers and batch_size must be positive")

    bounds = [
        (start, min(start + batch_size, n_trajectories))
        for start in range(0, n_trajectories, batch_size)
    ]
    tasks = [
        (
            psi0, tuple(generators), model, dt, n_steps, seed, lo, hi,
            tuple(observers), sample_stride, noise_block,
        )
        for lo, hi in bounds
    ]

    logger.info(
        "Running trajectory ensemble",
        extra={
            "n_trajectories": n_trajectories,
            "batches": len(tasks),
            "workers": workers,
            "seed": seed,
        },
    )

    if workers == 1 or len(tasks) == 1:
        batches = [_run_batch(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            batches = list(executor.map(_run_batch, tasks))

    records = [rec for batch in batches for rec in batch]
    TRAJECTORIES_COMPLETED.inc(len(records))
    return TrajectoryEnsemble(seed=seed, records=records)
