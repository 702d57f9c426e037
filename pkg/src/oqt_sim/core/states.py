"""State and operator types, all expressed in the energy eigenbasis.

Every value is immutable after construction: the wrapped arrays are copied
and marked read-only, so instances can be shared between trajectory workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from oqt_sim.errors import ContractViolation
from oqt_sim.utils.validation import Validator

ENERGY_BASIS = "energy"


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, copy=True)
    out.setflags(write=False)
    return out


def _require(result):
    if not result.is_valid:
        raise ContractViolation(result.error_message)
    return result.value


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """The Hamiltonian as an ordered real spectrum, plus an optional commuting charge."""

    energies: np.ndarray
    charge: Optional[np.ndarray] = None
    degeneracy_tolerance: float = 1e-9
    basis_tag: str = ENERGY_BASIS

    def __post_init__(self):
        energies = _require(Validator.validate_spectrum(self.energies))
        object.__setattr__(self, "energies", _frozen(energies))

        if self.charge is not None:
            charge = np.asarray(self.charge, dtype=np.float64)
            if charge.shape != energies.shape:
                raise ContractViolation(
                    f"charge has length {charge.size}, spectrum has {energies.size} levels"
                )
            object.__setattr__(self, "charge", _frozen(charge))

        if self.degeneracy_tolerance < 0:
            raise ContractViolation("degeneracy_tolerance must be >= 0")

    @property
    def dim(self) -> int:
        return int(self.energies.size)

    @property
    def bandwidth(self) -> float:
        return float(self.energies[-1] - self.energies[0])

    def shifted(self, offset: float) -> SpectralModel:
        """Same model with every energy shifted by ``offset``."""
        return SpectralModel(
            self.energies + offset,
            charge=self.charge,
            degeneracy_tolerance=self.degeneracy_tolerance,
            basis_tag=self.basis_tag,
        )

    def hamiltonian(self) -> np.ndarray:
        """Dense diagonal Hamiltonian matrix."""
        return np.diag(self.energies).astype(np.complex128)


@dataclass(frozen=True, eq=False)
class StateVector:
    """One trajectory's pure state as amplitudes in the energy eigenbasis."""

    amplitudes: np.ndarray
    basis_tag: str = ENERGY_BASIS

    def __post_init__(self):
        vec = _require(Validator.validate_vector(self.amplitudes))
        object.__setattr__(self, "amplitudes", _frozen(vec))

    @classmethod
    def basis(cls, dim: int, index: int, basis_tag: str = ENERGY_BASIS) -> StateVector:
        """The eigenvector ``|index>`` of a ``dim``-level model."""
        if not 0 <= index < dim:
            raise ContractViolation(f"basis index {index} outside 0..{dim - 1}")
        vec = np.zeros(dim, dtype=np.complex128)
        vec[index] = 1.0
        return cls(vec, basis_tag)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return abs(self.norm_sq - 1.0) <= tol

    def normalize(self) -> StateVector:
        """Return the unit-norm state; idempotent on normalized input."""
        norm = np.sqrt(self.norm_sq)
        if norm == 0.0:
            raise ContractViolation("cannot normalize the zero vector")
        if self.is_normalized(tol=1e-15):
            return self
        return StateVector(self.amplitudes / norm, self.basis_tag)

    def require_normalized(self, tol: float = 1e-8) -> None:
        _require(Validator.validate_normalized(self.amplitudes, tol))

    def projector(self) -> DensityMatrix:
        """Pure-state density matrix |psi><psi|."""
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.basis_tag)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite ensemble state.

    Pass ``check=False`` only for intermediate integrator values that are
    validated elsewhere.
    """

    entries: np.ndarray
    basis_tag: str = ENERGY_BASIS
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if self.check:
            mat = _require(Validator.validate_density(self.entries))
        else:
            mat = _require(Validator.validate_square(self.entries))
        object.__setattr__(self, "entries", _frozen(mat))

    @classmethod
    def diagonal(cls, weights: np.ndarray, basis_tag: str = ENERGY_BASIS) -> DensityMatrix:
        return cls(np.diag(np.asarray(weights, dtype=np.float64)).astype(np.complex128), basis_tag)

    @classmethod
    def maximally_mixed(cls, dim: int, basis_tag: str = ENERGY_BASIS) -> DensityMatrix:
        return cls.diagonal(np.full(dim, 1.0 / dim), basis_tag)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.entries, self.entries)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True, eq=False)
class Observable:
    """A Hermitian observable given in the energy eigenbasis."""

    matrix: np.ndarray
    label: str = "O"

    def __post_init__(self):
        mat = _require(Validator.validate_hermitian(self.matrix))
        object.__setattr__(self, "matrix", _frozen(mat))

    @classmethod
    def identity(cls, dim: int) -> Observable:
        return cls(np.eye(dim, dtype=np.complex128), "I")

    @classmethod
    def diagonal(cls, values: np.ndarray, label: str = "O") -> Observable:
        return cls(np.diag(np.asarray(values, dtype=np.float64)).astype(np.complex128), label)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])
