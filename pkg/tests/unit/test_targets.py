"""Unit tests for microcanonical and canonical targets."""

import numpy as np
import pytest

from oqt_sim.core.states import SpectralModel, StateVector
from oqt_sim.errors import ContractViolation, DomainError
from oqt_sim.targets import as_density, build_canonical, build_microcanonical
from oqt_sim.targets.microcanonical import apply_charge_filter, restrict_to_window


def superposition(dim, levels):
    amps = np.zeros(dim, dtype=complex)
    amps[list(levels)] = 1.0
    return StateVector(amps / np.sqrt(len(levels)))


@pytest.mark.unit
class TestMicrocanonical:
    """Test cases for build_microcanonical."""

    def test_window_from_two_level_superposition(self, four_levels):
        target = build_microcanonical(superposition(4, [1, 2]), four_levels)
        assert target.members == (1, 2)
        assert target.omega == 2
        np.testing.assert_allclose(target.weights, [0.0, 0.5, 0.5, 0.0])
        assert target.window == pytest.approx((1.0, 2.0))

    def test_eigenstate_gives_single_level(self, four_levels):
        target = build_microcanonical(StateVector.basis(4, 3), four_levels)
        assert target.members == (3,)
        assert target.energy_offset == pytest.approx(0.0)

    def test_degenerate_cluster_taken_whole(self):
        model = SpectralModel(np.array([0.0, 1.0, 1.0 + 1e-10, 3.0]), degeneracy_tolerance=1e-9)
        target = build_microcanonical(superposition(4, [0, 1]), model)
        assert target.members == (0, 1, 2)
        assert target.energy_offset > 0

    def test_weights_sum_to_one(self, ladder):
        _, _, target = ladder
        assert float(np.sum(target.weights)) == pytest.approx(1.0)
        assert as_density(target).trace() == pytest.approx(1.0)

    def test_to_dict(self, four_levels):
        data = build_microcanonical(superposition(4, [1, 2]), four_levels).to_dict()
        assert data["kind"] == "microcanonical"
        assert data["members"] == [1, 2]

    def test_charge_filter_needs_charge(self, four_levels):
        psi = superposition(4, [1, 2])
        target = build_microcanonical(psi, four_levels)
        with pytest.raises(ContractViolation, match="charge"):
            apply_charge_filter(target, psi, four_levels)

    def test_charge_filter_narrows_window(self):
        model = SpectralModel(np.array([0.0, 1.0, 2.0, 3.0]), charge=np.array([0.0, 0.0, 5.0, 5.0]))
        psi = StateVector(np.array([0.0, 0.9, 0.1, 0.0], dtype=complex) ** 0.5)
        target = build_microcanonical(psi, model)
        filtered = apply_charge_filter(target, psi, model)
        assert set(filtered.members) <= set(target.members)
        assert filtered.charge_window is not None
        assert float(np.sum(filtered.weights)) == pytest.approx(1.0)

    def test_restrict_to_window(self, ladder):
        _, psi0, target = ladder
        assert target.outside_weight(psi0) > 0.0
        inside = restrict_to_window(psi0, target)
        assert inside.is_normalized()
        assert target.outside_weight(inside) == 0.0
        assert target.outside_weight(inside.projector()) == 0.0

    def test_restrict_state_outside_window(self, four_levels):
        target = build_microcanonical(superposition(4, [1, 2]), four_levels)
        with pytest.raises(DomainError, match="no weight"):
            restrict_to_window(StateVector.basis(4, 0), target)


@pytest.mark.unit
class TestCanonical:
    """Test cases for build_canonical."""

    def test_mean_energy_gives_infinite_temperature(self, four_levels):
        target = build_canonical(1.5, four_levels)
        assert target.beta == 0.0
        np.testing.assert_allclose(target.weights, np.full(4, 0.25))

    def test_energy_is_matched(self, four_levels):
        target = build_canonical(0.8, four_levels)
        assert target.beta > 0
        assert float(target.weights @ four_levels.energies) == pytest.approx(0.8, abs=1e-9)

    def test_negative_temperature_above_mean(self, four_levels):
        assert build_canonical(2.4, four_levels).beta < 0

    def test_energy_outside_spectrum(self, four_levels):
        with pytest.raises(DomainError):
            build_canonical(3.5, four_levels)

    def test_full_support(self, four_levels):
        target = build_canonical(1.0, four_levels)
        assert target.members == (0, 1, 2, 3)
        assert target.omega == 4
