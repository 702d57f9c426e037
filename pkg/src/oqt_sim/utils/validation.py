"""Input validation for state, operator and integrator arguments."""

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

# Tolerances of the data-type invariants
NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-9


@dataclass
class ValidationResult:
    """Result of validation operation."""
    is_valid: bool
    value: Any
    error_message: Optional[str] = None


class Validator:
    """Validation of numeric inputs.

    Every check returns a ValidationResult; callers decide which exception
    a failed result turns into.
    """

    @classmethod
    def validate_vector(cls, amplitudes: Any) -> ValidationResult:
        """Validate a complex amplitude vector.

        Args:
            amplitudes: Array-like of amplitudes

        Returns:
            ValidationResult with the vector as complex128
        """
        try:
            vec = np.asarray(amplitudes, dtype=np.complex128)
        except (TypeError, ValueError):
            return ValidationResult(False, None, "Amplitudes must be numeric")

        if vec.ndim != 1:
            return ValidationResult(False, None, f"Amplitudes must be 1-D, got shape {vec.shape}")
        if vec.size < 1:
            return ValidationResult(False, None, "Dimension must be at least 1")
        if not np.all(np.isfinite(vec)):
            return ValidationResult(False, None, "Amplitudes contain non-finite values")

        return ValidationResult(True, vec)

    @classmethod
    def validate_normalized(cls, vec: np.ndarray, tol: float = NORM_TOL) -> ValidationResult:
        """Validate that a vector has unit norm."""
        norm_sq = float(np.vdot(vec, vec).real)
        if abs(norm_sq - 1.0) > tol:
            return ValidationResult(
                False, None, f"State is not normalized (|psi|^2 = {norm_sq:.3e})"
            )
        return ValidationResult(True, vec)

    @classmethod
    def validate_square(cls, matrix: Any) -> ValidationResult:
        """Validate a square complex matrix."""
        try:
            mat = np.asarray(matrix, dtype=np.complex128)
        except (TypeError, ValueError):
            return ValidationResult(False, None, "Matrix must be numeric")

        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            return ValidationResult(False, None, f"Matrix must be square, got shape {mat.shape}")
        if mat.shape[0] < 1:
            return ValidationResult(False, None, "Dimension must be at least 1")
        if not np.all(np.isfinite(mat)):
            return ValidationResult(False, None, "Matrix contains non-finite values")

        return ValidationResult(True, mat)

    @classmethod
    def validate_hermitian(cls, matrix: Any, tol: float = HERMITIAN_TOL) -> ValidationResult:
        """Validate a Hermitian matrix."""
        result = cls.validate_square(matrix)
        if not result.is_valid:
            return result

        mat = result.value
        defect = float(np.max(np.abs(mat - mat.conj().T)))
        if defect > tol:
            return ValidationResult(False, None, f"Matrix is not Hermitian (defect {defect:.3e})")

        return ValidationResult(True, mat)

    @classmethod
    def validate_density(
        cls,
        matrix: Any,
        trace_tol: float = TRACE_TOL,
        psd_tol: float = PSD_TOL,
    ) -> ValidationResult:
        """Validate a density matrix: Hermitian, unit trace, positive semidefinite."""
        result = cls.validate_hermitian(matrix)
        if not result.is_valid:
            return result

        mat = result.value
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > trace_tol:
            return ValidationResult(False, None, f"Trace is {trace.real:.12f}, expected 1")

        smallest = float(np.linalg.eigvalsh(mat)[0])
        if smallest < -psd_tol:
            return ValidationResult(
                False, None, f"Matrix is not positive semidefinite (eigenvalue {smallest:.3e})"
            )

        return ValidationResult(True, mat)

    @classmethod
    def validate_spectrum(cls, energies: Any) -> ValidationResult:
        """Validate an energy spectrum: finite, 1-D, nondecreasing."""
        try:
            values = np.asarray(energies, dtype=np.float64)
        except (TypeError, ValueError):
            return ValidationResult(False, None, "Energies must be real numbers")

        if values.ndim != 1 or values.size < 1:
            return ValidationResult(False, None, "Energies must be a non-empty 1-D array")
        if not np.all(np.isfinite(values)):
            return ValidationResult(False, None, "Energies contain non-finite values")
        if np.any(np.diff(values) < 0):
            return ValidationResult(False, None, "Energies must be sorted nondecreasing")

        return ValidationResult(True, values)

    @classmethod
    def validate_coupling(cls, name: str, value: Any) -> ValidationResult:
        """Validate a non-negative finite coupling constant."""
        try:
            coupling = float(value)
        except (TypeError, ValueError):
            return ValidationResult(False, None, f"{name} must be a real number")

        if not np.isfinite(coupling) or coupling < 0:
            return ValidationResult(False, None, f"{name} must be finite and >= 0, got {coupling}")

        return ValidationResult(True, coupling)

    @classmethod
    def validate_step(cls, dt: Any, rate: float, limit: float, guard: str) -> ValidationResult:
        """Validate a time step against a stability guard rate * dt <= limit.

        Args:
            dt: Time step
            rate: Total coupling rate the guard applies to
            limit: Upper bound of rate * dt
            guard: Human readable guard name for the error message

        Returns:
            ValidationResult with dt as float
        """
        try:
            step = float(dt)
        except (TypeError, ValueError):
            return ValidationResult(False, None, "dt must be a real number")

        if not np.isfinite(step) or step <= 0:
            return ValidationResult(False, None, f"dt must be > 0, got {step}")
        if rate * step > limit:
            return ValidationResult(
                False,
                None,
                f"stability guard {guard} violated: {rate * step:.4g} > {limit}; use a smaller dt",
            )

        return ValidationResult(True, step)
