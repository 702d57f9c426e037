"""Measurement-free functionals of states: expectations, entropies, distances.

Joint index convention for bipartite spaces: ``k = a * d_B + b``. The
partial trace and tensor product below both rely on it, so a reshape to
``(d_A, d_B, d_A, d_B)`` is exact.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy.special import entr

from oqt_sim.core.states import DensityMatrix, Observable, SpectralModel, StateVector
from oqt_sim.errors import ContractViolation

IMAG_RESIDUE_TOL = 1e-9
ENTROPY_EIGEN_FLOOR = 1e-14
SUPPORT_THRESHOLD = 1e-12
NEGATIVE_SLACK = 1e-9
VARIANCE_CLAMP = 1e-12

State = Union[StateVector, DensityMatrix]


class Subsystem(Enum):
    """Factor kept by a partial trace."""
    A = "A"
    B = "B"


def _check_dim(expected: int, got: int, what: str) -> None:
    if expected != got:
        raise ContractViolation(
            f"dimension mismatch: {what} has dimension {got}, expected {expected}"
        )


def expectation(state: State, obs: Observable) -> float:
    """<psi|O|psi> for a pure state or Tr[rho O] for a density matrix."""
    _check_dim(state.dim, obs.dim, f"observable '{obs.label}'")

    if isinstance(state, StateVector):
        psi = state.amplitudes
        value = np.vdot(psi, obs.matrix @ psi)
    else:
        value = np.einsum("ij,ji->", state.entries, obs.matrix)

    if abs(value.imag) > IMAG_RESIDUE_TOL:
        raise ContractViolation(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def energy_stats(state: State, model: SpectralModel) -> Tuple[float, float]:
    """Energy mean and variance of a state.

    Mixed states are accepted too; only their diagonal enters because the
    Hamiltonian is diagonal.
    """
    _check_dim(model.dim, state.dim, "state")
    if isinstance(state, StateVector):
        state.require_normalized()
    elif abs(state.trace() - 1.0) > 1e-8:
        raise ContractViolation(f"density matrix has trace {state.trace():.12f}")

    p = state.populations
    energies = model.energies
    mean = float(p @ energies)
    variance = float(p @ energies**2 - mean**2)

    if variance < 0:
        if variance < -VARIANCE_CLAMP * max(1.0, mean**2):
            raise ContractViolation(f"negative energy variance {variance:.3e}")
        variance = 0.0
    return mean, variance


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S = -Tr[rho log rho] in nats; eigenvalues below 1e-14 count as zero."""
    eigenvalues = rho.eigenvalues()
    if eigenvalues[0] < -NEGATIVE_SLACK:
        raise ContractViolation(
            f"state is not positive semidefinite (eigenvalue {eigenvalues[0]:.3e})"
        )
    eigenvalues = np.where(eigenvalues < ENTROPY_EIGEN_FLOOR, 0.0, eigenvalues)
    return float(math.fsum(entr(eigenvalues)))


def relative_entropy(chi: DensityMatrix, rho: DensityMatrix) -> float:
    """Umegaki relative entropy D[chi||rho], or +inf if supp(chi) is not inside supp(rho)."""
    _check_dim(chi.dim, rho.dim, "rho")

    a, u = np.linalg.eigh(chi.entries)
    b, v = np.linalg.eigh(rho.entries)
    a = np.where(a < SUPPORT_THRESHOLD, 0.0, a)

    # overlap[i, j] = |<a_i|b_j>|^2
    overlap = np.abs(u.conj().T @ v) ** 2
    weight_on_b = a @ overlap

    in_support = b > SUPPORT_THRESHOLD
    if np.any(weight_on_b[~in_support] > SUPPORT_THRESHOLD):
        return math.inf

    chi_log_chi = -math.fsum(entr(a))
    chi_log_rho = math.fsum(weight_on_b[in_support] * np.log(b[in_support]))
    divergence = chi_log_chi - chi_log_rho

    if divergence < -NEGATIVE_SLACK:
        raise ContractViolation(f"relative entropy came out negative ({divergence:.3e})")
    return max(divergence, 0.0)


def trace_distance_sq(rho: DensityMatrix, chi: DensityMatrix) -> float:
    """Squared trace distance Tr[(rho - chi)^2] = sum_ij |rho_ij - chi_ij|^2."""
    _check_dim(rho.dim, chi.dim, "chi")
    return float(np.sum(np.abs(rho.entries - chi.entries) ** 2))


def partial_trace(rho_ab: DensityMatrix, dims: Tuple[int, int], keep: Subsystem) -> DensityMatrix:
    """Reduced state of one factor of ``rho_ab`` on ``H_A (x) H_B``."""
    d_a, d_b = dims
    if d_a < 1 or d_b < 1 or d_a * d_b != rho_ab.dim:
        raise ContractViolation(
            f"dims {d_a}x{d_b} do not factor the joint dimension {rho_ab.dim}"
        )

    blocks = rho_ab.entries.reshape(d_a, d_b, d_a, d_b)
    if keep is Subsystem.B:
        reduced = np.einsum("abac->bc", blocks)
    else:
        reduced = np.einsum("abcb->ac", blocks)

    reduced = 0.5 * (reduced + reduced.conj().T)
    return DensityMatrix(reduced, rho_ab.basis_tag, check=rho_ab.check)


def tensor_product(a, b):
    """Kronecker product of two density matrices or two observables."""
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(
            np.kron(a.entries, b.entries),
            f"{a.basis_tag}(x){b.basis_tag}",
            check=a.check and b.check,
        )
    if isinstance(a, Observable) and isinstance(b, Observable):
        return Observable(np.kron(a.matrix, b.matrix), f"{a.label}(x){b.label}")
    raise ContractViolation(
        f"tensor_product needs two operands of the same kind, got {type(a).__name__} "
        f"and {type(b).__name__}"
    )
