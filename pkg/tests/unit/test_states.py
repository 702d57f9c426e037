"""Unit tests for the state and operator types."""

import numpy as np
import pytest

from oqt_sim.core.states import DensityMatrix, Observable, SpectralModel, StateVector
from oqt_sim.errors import ContractViolation


@pytest.mark.unit
class TestSpectralModel:
    """Test cases for SpectralModel."""

    def test_dim_and_bandwidth(self, four_levels):
        assert four_levels.dim == 4
        assert four_levels.bandwidth == 3.0

    def test_unsorted_spectrum_rejected(self):
        with pytest.raises(ContractViolation, match="sorted"):
            SpectralModel(np.array([1.0, 0.0]))

    def test_non_finite_spectrum_rejected(self):
        with pytest.raises(ContractViolation):
            SpectralModel(np.array([0.0, np.inf]))

    def test_charge_length_must_match(self):
        with pytest.raises(ContractViolation, match="charge"):
            SpectralModel(np.array([0.0, 1.0]), charge=np.array([1.0]))

    def test_energies_are_read_only(self, four_levels):
        with pytest.raises(ValueError):
            four_levels.energies[0] = 5.0

    def test_shifted_keeps_gaps(self, four_levels):
        shifted = four_levels.shifted(2.5)
        np.testing.assert_allclose(np.diff(shifted.energies), np.diff(four_levels.energies))
        assert shifted.energies[0] == 2.5

    def test_hamiltonian_is_diagonal(self, four_levels):
        h = four_levels.hamiltonian()
        assert h.dtype == np.complex128
        np.testing.assert_array_equal(np.diag(h).real, four_levels.energies)
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0


@pytest.mark.unit
class TestStateVector:
    """Test cases for StateVector."""

    def test_basis_state(self):
        psi = StateVector.basis(3, 1)
        np.testing.assert_array_equal(psi.populations, [0.0, 1.0, 0.0])

    def test_basis_index_out_of_range(self):
        with pytest.raises(ContractViolation):
            StateVector.basis(3, 3)

    def test_normalize(self):
        psi = StateVector(np.array([3.0, 4.0])).normalize()
        assert psi.is_normalized()
        np.testing.assert_allclose(psi.populations, [0.36, 0.64])

    def test_normalize_is_idempotent(self):
        psi = StateVector(np.array([1.0, 1.0j]) / np.sqrt(2.0)).normalize()
        assert psi.normalize() is psi

    def test_zero_vector_cannot_be_normalized(self):
        with pytest.raises(ContractViolation, match="zero vector"):
            StateVector(np.zeros(2)).normalize()

    def test_require_normalized(self):
        with pytest.raises(ContractViolation, match="not normalized"):
            StateVector(np.array([1.0, 1.0])).require_normalized()

    def test_projector_is_pure(self):
        psi = StateVector(np.array([1.0, 1.0j, -1.0]) / np.sqrt(3.0))
        rho = psi.projector()
        assert rho.purity() == pytest.approx(1.0)
        assert rho.trace() == pytest.approx(1.0)

    def test_two_dimensional_input_rejected(self):
        with pytest.raises(ContractViolation, match="1-D"):
            StateVector(np.eye(2))


@pytest.mark.unit
class TestDensityMatrix:
    """Test cases for DensityMatrix."""

    def test_maximally_mixed(self):
        rho = DensityMatrix.maximally_mixed(4)
        np.testing.assert_allclose(rho.populations, np.full(4, 0.25))
        assert rho.purity() == pytest.approx(0.25)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ContractViolation, match="Hermitian"):
            DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_wrong_trace_rejected(self):
        with pytest.raises(ContractViolation, match="Trace"):
            DensityMatrix(np.diag([0.5, 0.6]))

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(ContractViolation, match="positive semidefinite"):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_unchecked_matrix_skips_density_checks(self):
        rho = DensityMatrix(np.diag([1.0, 1.0]), check=False)
        assert rho.trace() == 2.0

    def test_entries_are_copied(self):
        mat = np.diag([1.0, 0.0]).astype(complex)
        rho = DensityMatrix(mat)
        mat[0, 0] = 0.0
        assert rho.entries[0, 0] == 1.0


@pytest.mark.unit
class TestObservable:
    """Test cases for Observable."""

    def test_non_hermitian_rejected(self):
        with pytest.raises(ContractViolation):
            Observable(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_identity(self):
        assert Observable.identity(3).label == "I"

    def test_diagonal(self):
        obs = Observable.diagonal(np.array([1.0, 2.0]), "H")
        np.testing.assert_array_equal(np.diag(obs.matrix).real, [1.0, 2.0])
        assert obs.dim == 2
