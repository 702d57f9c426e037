"""Unit tests for validation utilities."""

import numpy as np
import pytest

from oqt_sim.utils.validation import ValidationResult, Validator


@pytest.mark.unit
class TestValidator:
    """Test cases for Validator class."""

    def test_validate_vector_valid(self):
        """Test a valid amplitude vector."""
        result = Validator.validate_vector([1, 0, 0])
        assert result.is_valid is True
        assert result.value.dtype == np.complex128
        assert result.error_message is None

    def test_validate_vector_matrix(self):
        """Test that 2-D input is rejected."""
        result = Validator.validate_vector(np.eye(2))
        assert result.is_valid is False
        assert "1-D" in result.error_message

    def test_validate_vector_empty(self):
        result = Validator.validate_vector([])
        assert result.is_valid is False

    def test_validate_vector_non_finite(self):
        result = Validator.validate_vector([1.0, np.nan])
        assert result.is_valid is False
        assert result.error_message == "Amplitudes contain non-finite values"

    def test_validate_vector_not_numeric(self):
        assert Validator.validate_vector(["a", "b"]).is_valid is False

    def test_validate_normalized(self):
        """Test the unit norm check."""
        assert Validator.validate_normalized(np.array([0.6, 0.8j])).is_valid is True
        result = Validator.validate_normalized(np.array([1.0, 1.0]))
        assert result.is_valid is False
        assert "not normalized" in result.error_message

    def test_validate_square(self):
        assert Validator.validate_square(np.ones((2, 3))).is_valid is False
        assert Validator.validate_square(np.eye(3)).value.shape == (3, 3)

    def test_validate_hermitian(self):
        """Test the Hermiticity check."""
        assert Validator.validate_hermitian([[1, 1j], [-1j, 2]]).is_valid is True
        result = Validator.validate_hermitian([[1, 1j], [1j, 2]])
        assert result.is_valid is False
        assert "not Hermitian" in result.error_message

    def test_validate_density_valid(self):
        result = Validator.validate_density(np.diag([0.25, 0.75]))
        assert result.is_valid is True

    def test_validate_density_trace(self):
        result = Validator.validate_density(np.eye(2))
        assert result.is_valid is False
        assert result.error_message.startswith("Trace is")

    def test_validate_density_negative_eigenvalue(self):
        result = Validator.validate_density(np.diag([1.5, -0.5]))
        assert result.is_valid is False
        assert "positive semidefinite" in result.error_message

    def test_validate_spectrum(self):
        """Test spectrum ordering."""
        assert Validator.validate_spectrum([0.0, 1.0, 1.0, 2.0]).is_valid is True
        result = Validator.validate_spectrum([1.0, 0.0])
        assert result.is_valid is False
        assert result.error_message == "Energies must be sorted nondecreasing"

    @pytest.mark.parametrize("value", [-1.0, float("inf"), "fast"])
    def test_validate_coupling_invalid(self, value):
        result = Validator.validate_coupling("alpha_eff", value)
        assert result.is_valid is False
        assert result.error_message.startswith("alpha_eff")

    def test_validate_coupling_string_number(self):
        result = Validator.validate_coupling("j_eff", "0.5")
        assert result.is_valid is True
        assert result.value == 0.5

    def test_validate_step(self):
        """Test the stability guard on the time step."""
        assert Validator.validate_step(0.01, 5.0, 0.1, "alpha_eff*dt <= 0.1").value == 0.01
        result = Validator.validate_step(0.05, 5.0, 0.1, "alpha_eff*dt <= 0.1")
        assert result.is_valid is False
        assert "stability guard alpha_eff*dt <= 0.1 violated" in result.error_message

    def test_validate_step_non_positive(self):
        assert Validator.validate_step(0.0, 1.0, 0.1, "g").is_valid is False


@pytest.mark.unit
class TestValidationResult:
    """Test cases for ValidationResult."""

    def test_defaults(self):
        result = ValidationResult(True, 3)
        assert result.error_message is None
