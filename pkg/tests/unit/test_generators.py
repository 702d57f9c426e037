"""Unit tests for the OQT and SUV generators and the Wiener source."""

import numpy as np
import pytest

from oqt_sim.dynamics.generators import OQTGenerator, SUVGenerator, validate_generators
from oqt_sim.dynamics.noise import WienerSource
from oqt_sim.errors import ContractViolation


@pytest.mark.unit
class TestOQTGenerator:
    """Test cases for OQTGenerator."""

    def test_rates_follow_target(self, ladder):
        _, _, target = ladder
        gen = OQTGenerator(2.0, target)
        np.testing.assert_allclose(gen.rates, 2.0 * np.asarray(target.weights))
        assert float(np.sum(gen.rates)) == pytest.approx(2.0)

    def test_noise_amplitudes_are_square_roots(self, ladder):
        _, _, target = ladder
        gen = OQTGenerator(2.0, target)
        np.testing.assert_allclose(gen.noise_amplitudes**2, gen.rates[gen.members])

    def test_channel_count(self, ladder):
        _, _, target = ladder
        assert OQTGenerator(1.0, target).n_channels == target.omega * target.dim

    def test_zero_coupling_is_inactive(self, ladder):
        _, _, target = ladder
        gen = OQTGenerator(0.0, target)
        assert not gen.active
        assert gen.n_channels == 0

    def test_negative_coupling_rejected(self, ladder):
        _, _, target = ladder
        with pytest.raises(ContractViolation, match="alpha_eff"):
            OQTGenerator(-1.0, target)


@pytest.mark.unit
class TestSUVGenerator:
    """Test cases for SUVGenerator."""

    def test_contiguous_split(self):
        gen = SUVGenerator.contiguous(5, 2, 1.0)
        assert gen.projectors == ((0, 1, 2), (3, 4))
        np.testing.assert_array_equal(gen.labels, [0, 0, 0, 1, 1])
        assert gen.n_channels == 2

    def test_overlapping_sectors_rejected(self):
        with pytest.raises(ContractViolation, match="disjoint"):
            SUVGenerator(1.0, ((0, 1), (1, 2)))

    def test_incomplete_cover_rejected(self):
        with pytest.raises(ContractViolation):
            SUVGenerator(1.0, ((0,), (2,)))

    def test_too_many_sectors(self):
        with pytest.raises(ContractViolation):
            SUVGenerator.contiguous(3, 4, 1.0)

    def test_sector_weights(self):
        gen = SUVGenerator.contiguous(4, 2, 1.0)
        weights = gen.sector_weights(np.array([[0.1, 0.2, 0.3, 0.4]]))
        np.testing.assert_allclose(weights, [[0.3, 0.7]])

    def test_same_sector_mask(self):
        mask = SUVGenerator.contiguous(4, 2, 1.0).same_sector_mask()
        assert mask[0, 1] and mask[2, 3]
        assert not mask[1, 2]

    def test_dimension_mismatch(self):
        with pytest.raises(ContractViolation):
            validate_generators(6, [SUVGenerator.contiguous(4, 2, 1.0)])


@pytest.mark.unit
class TestWienerSource:
    """Test cases for WienerSource."""

    def test_same_key_same_stream(self):
        a = WienerSource(7, 3).block(10, 4, 0.01)
        b = WienerSource(7, 3).block(10, 4, 0.01)
        np.testing.assert_array_equal(a, b)

    def test_streams_are_distinct(self):
        a = WienerSource(7, 3).block(10, 4, 0.01)
        b = WienerSource(7, 4).block(10, 4, 0.01)
        assert not np.array_equal(a, b)

    def test_blocking_does_not_change_values(self):
        block = WienerSource(1, 0).block(6, 3, 0.01)
        src = WienerSource(1, 0)
        stepwise = np.stack([src.increments(3, 0.01) for _ in range(6)])
        np.testing.assert_array_equal(block, stepwise)
        assert src.draws == 18

    def test_variance_scales_with_dt(self):
        draws = WienerSource(0, 0).block(20000, 1, 0.04)
        assert float(np.var(draws)) == pytest.approx(0.04, rel=0.05)

    def test_negative_seed_rejected(self):
        with pytest.raises(ContractViolation):
            WienerSource(-1)

    def test_no_channels_draws_nothing(self):
        src = WienerSource(0, 0)
        assert src.block(5, 0, 0.1).shape == (5, 0)
        assert src.draws == 0
