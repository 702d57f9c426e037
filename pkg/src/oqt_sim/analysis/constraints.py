"""The generic rate-matrix process and the constraints that single out OQT.

For transition operators L_mu_nu = |mu><nu| with non-negative rates J[mu, nu]
the unconstrained generator is

    -i [H, rho] + sum_mu_nu J[mu, nu] (L rho L^dag - 1/2 {L^dag L, rho}).

Requiring chi to be stationary and the energy to be conserved fixes the rates
to the product form J[mu, nu] = alpha_eff * chi[mu].
"""

from __future__ import annotations

import numpy as np

from oqt_sim.core.states import DensityMatrix, SpectralModel
from oqt_sim.errors import ContractViolation


def _rates(rates: np.ndarray, dim: int) -> np.ndarray:
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape != (dim, dim):
        raise ContractViolation(f"rate matrix has shape {rates.shape}, expected ({dim}, {dim})")
    if np.any(rates < 0) or not np.all(np.isfinite(rates)):
        raise ContractViolation("rates must be finite and non-negative")
    return rates


def generic_rhs(rho: DensityMatrix, model: SpectralModel, rates: np.ndarray) -> np.ndarray:
    """Master-equation derivative for an arbitrary rate matrix."""
    d = model.dim
    if rho.dim != d:
        raise ContractViolation(f"state has dimension {rho.dim}, model has {d}")
    rates = _rates(rates, d)

    mat = rho.entries
    energies = model.energies
    unitary = -1j * (energies[:, None] - energies[None, :]) * mat

    gain = np.diag(rates @ rho.populations).astype(np.complex128)
    loss = rates.sum(axis=0)  # Gamma_nu = sum_mu J[mu, nu]
    anticommutator = 0.5 * (loss[:, None] + loss[None, :]) * mat
    return unitary + gain - anticommutator


def steady_state_constraint(rates: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """Diagonal of C_chi = sum J[mu, nu] chi_nu (|mu><mu| - |nu><nu|).

    Zero iff chi is stationary under the rate matrix.
    """
    chi = np.asarray(chi, dtype=np.float64)
    rates = _rates(rates, chi.size)
    return rates @ chi - chi * rates.sum(axis=0)


def energy_constraint(rates: np.ndarray, rho: DensityMatrix, model: SpectralModel) -> float:
    """C_E = sum J[mu, nu] rho_nu_nu (E_mu - E_nu), the energy drift of the dissipator."""
    rates = _rates(rates, model.dim)
    energies = model.energies
    p = rho.populations
    return float(np.sum(rates * p[None, :] * (energies[:, None] - energies[None, :])))


def product_rates(chi: np.ndarray, alpha_eff: float) -> np.ndarray:
    """J[mu, nu] = alpha_eff * chi[mu], independent of nu."""
    chi = np.asarray(chi, dtype=np.float64)
    return np.outer(alpha_eff * chi, np.ones_like(chi))
