"""Generators of the stochastic modifications: OQT thermalization and SUV collapse."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from oqt_sim.errors import ContractViolation
from oqt_sim.targets import Target
from oqt_sim.utils.validation import Validator


def _coupling(name: str, value: float) -> float:
    result = Validator.validate_coupling(name, value)
    if not result.is_valid:
        raise ContractViolation(result.error_message)
    return result.value


@dataclass(frozen=True, eq=False)
class OQTGenerator:
    """Thermalizing generator with rates A^mu = alpha_eff * chi^mu.

    Channels are the transition operators |mu><nu| for mu in W and every nu,
    in row-major order over (mu ascending, nu ascending). Channel (mu, nu)
    carries noise amplitude sqrt(A^mu) and drift coefficient A^mu.
    """

    alpha_eff: float
    target: Target

    def __post_init__(self):
        object.__setattr__(self, "alpha_eff", _coupling("alpha_eff", self.alpha_eff))

    @property
    def dim(self) -> int:
        return self.target.dim

    @property
    def members(self) -> np.ndarray:
        return np.asarray(self.target.members, dtype=np.intp)

    @property
    def rates(self) -> np.ndarray:
        """A^mu on the full spectrum; zero outside W."""
        return self.alpha_eff * np.asarray(self.target.weights, dtype=np.float64)

    @property
    def noise_amplitudes(self) -> np.ndarray:
        """sqrt(A^mu) for mu in W, in channel order."""
        return np.sqrt(self.rates[self.members])

    @property
    def active(self) -> bool:
        return self.alpha_eff > 0

    @property
    def n_channels(self) -> int:
        return len(self.target.members) * self.dim if self.active else 0

    @property
    def chi(self) -> np.ndarray:
        return np.asarray(self.target.weights, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class SUVGenerator:
    """Collapse generator onto diagonal macro-sectors K_k partitioning the basis."""

    j_eff: float
    projectors: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "j_eff", _coupling("j_eff", self.j_eff))

        sectors = tuple(tuple(sorted(int(i) for i in sector)) for sector in self.projectors)
        if not sectors or any(len(sector) == 0 for sector in sectors):
            raise ContractViolation("SUV sectors must be non-empty")

        flat = [i for sector in sectors for i in sector]
        dim = len(flat)
        if sorted(flat) != list(range(dim)):
            raise ContractViolation(
                "SUV sectors must be pairwise disjoint and cover 0..d-1 exactly"
            )

        labels = np.empty(dim, dtype=np.intp)
        for k, sector in enumerate(sectors):
            labels[list(sector)] = k
        labels.setflags(write=False)

        object.__setattr__(self, "projectors", sectors)
        object.__setattr__(self, "_labels", labels)

    @classmethod
    def contiguous(cls, dim: int, n_sectors: int, j_eff: float) -> SUVGenerator:
        """Split 0..dim-1 into ``n_sectors`` contiguous blocks of near-equal size."""
        if not 1 <= n_sectors <= dim:
            raise ContractViolation(f"cannot split {dim} levels into {n_sectors} sectors")
        blocks = np.array_split(np.arange(dim), n_sectors)
        return cls(j_eff, tuple(tuple(int(i) for i in b) for b in blocks))

    @property
    def dim(self) -> int:
        return int(self._labels.size)

    @property
    def labels(self) -> np.ndarray:
        """Sector index k(i) of every basis level."""
        return self._labels

    @property
    def n_sectors(self) -> int:
        return len(self.projectors)

    @property
    def active(self) -> bool:
        return self.j_eff > 0

    @property
    def n_channels(self) -> int:
        return self.n_sectors if self.active else 0

    def sector_weights(self, populations: np.ndarray) -> np.ndarray:
        """<P_k> for each sector; works on (..., d) population arrays."""
        populations = np.asarray(populations)
        out = np.zeros(populations.shape[:-1] + (self.n_sectors,), dtype=np.float64)
        for k, sector in enumerate(self.projectors):
            out[..., k] = np.sum(populations[..., list(sector)], axis=-1)
        return out

    def same_sector_mask(self) -> np.ndarray:
        """Boolean d x d mask of entries (i, j) with i and j in one sector."""
        return self._labels[:, None] == self._labels[None, :]


def validate_generators(dim: int, generators: Sequence[object]) -> None:
    """Check that every generator acts on a ``dim``-level space."""
    for gen in generators:
        if gen.dim != dim:
            raise ContractViolation(
                f"{type(gen).__name__} acts on {gen.dim} levels, model has {dim}"
            )
