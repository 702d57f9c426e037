"""Unit tests for single-trajectory integration."""

import numpy as np
import pytest

from oqt_sim.core.states import Observable, StateVector
from oqt_sim.dynamics.generators import OQTGenerator, SUVGenerator
from oqt_sim.dynamics.noise import WienerSource
from oqt_sim.dynamics.pool import exact_sum, run_trajectory_ensemble
from oqt_sim.dynamics.trajectory import (
    integrate_batch,
    integrate_trajectory,
    oqt_increment,
    oqt_step,
    sui_step,
    suv_step,
)
from oqt_sim.errors import ContractViolation, StepSizeError
from oqt_sim.targets import build_microcanonical


@pytest.mark.unit
class TestSingleSteps:
    """Test cases for the one-step integrators."""

    def test_step_keeps_norm(self, ladder):
        model, psi0, target = ladder
        psi = oqt_step(psi0, OQTGenerator(1.0, target), model, 0.01, WienerSource(0, 0))
        assert psi.is_normalized(tol=1e-12)

    def test_zero_coupling_is_unitary(self, ladder):
        model, psi0, target = ladder
        dt = 0.01
        psi = oqt_step(psi0, OQTGenerator(0.0, target), model, dt, WienerSource(0, 0))
        expected = np.exp(-1j * model.energies * dt) * psi0.amplitudes
        np.testing.assert_allclose(psi.amplitudes, expected, atol=1e-14)

    def test_step_guard(self, ladder):
        model, psi0, target = ladder
        with pytest.raises(StepSizeError, match="alpha_eff"):
            oqt_step(psi0, OQTGenerator(20.0, target), model, 0.01, WienerSource(0, 0))

    def test_suv_guard(self, ladder):
        _, psi0, _ = ladder
        with pytest.raises(StepSizeError):
            suv_step(psi0, SUVGenerator.contiguous(8, 2, 20.0), 0.01, WienerSource(0, 0))

    def test_unnormalized_input_rejected(self, ladder):
        model, _, target = ladder
        with pytest.raises(ContractViolation):
            oqt_step(
                StateVector(np.ones(8)), OQTGenerator(1.0, target), model, 0.01, WienerSource(0)
            )

    def test_hybrid_step_reduces_to_oqt(self, ladder):
        model, psi0, target = ladder
        oqt = OQTGenerator(1.0, target)
        a = sui_step(psi0, oqt, SUVGenerator.contiguous(8, 2, 0.0), model, 0.01, WienerSource(3, 1))
        b = oqt_step(psi0, oqt, model, 0.01, WienerSource(3, 1))
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)

    def test_hybrid_step_reduces_to_suv(self, ladder):
        model, psi0, target = ladder
        suv = SUVGenerator.contiguous(8, 2, 1.0)
        a = sui_step(psi0, OQTGenerator(0.0, target), suv, model, 0.01, WienerSource(3, 2))
        b = suv_step(psi0, suv, 0.01, WienerSource(3, 2), model=model)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)

    def test_suv_keeps_ratios_inside_a_sector(self, ladder):
        _, psi0, _ = ladder
        suv = SUVGenerator.contiguous(8, 2, 1.0)
        psi = psi0
        src = WienerSource(5, 0)
        for _ in range(50):
            psi = suv_step(psi, suv, 0.01, src)
        before = psi0.populations[1] / psi0.populations[2]
        after = psi.populations[1] / psi.populations[2]
        assert after == pytest.approx(before, rel=1e-10)


def channel_sum_increments(psi, gen, dw):
    """OQT noise and drift summed channel by channel over |mu><nu|, mu in W."""
    d = psi.size
    noise = np.zeros(d, dtype=complex)
    drift = np.zeros(d, dtype=complex)
    for a, mu in enumerate(gen.members):
        rate = gen.rates[mu]
        for nu in range(d):
            jump = np.zeros((d, d), dtype=complex)
            jump[mu, nu] = 1.0
            jumped = jump @ psi
            c = np.vdot(psi, jumped)
            drift += rate * (
                np.conj(c) * jumped - 0.5 * jump.conj().T @ jumped - 0.5 * abs(c) ** 2 * psi
            )
            noise += np.sqrt(rate) * dw[a * d + nu] * (jumped - c * psi)
    return noise, drift


@pytest.mark.unit
class TestClosedFormIncrements:
    """Test cases comparing oqt_increment with the explicit channel sums."""

    @pytest.fixture
    def random_state(self):
        rng = np.random.default_rng(23)
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        return amps / np.linalg.norm(amps)

    def test_drift_matches_channel_sum(self, ladder, random_state):
        _, _, target = ladder
        gen = OQTGenerator(1.3, target)
        zeros = np.zeros((1, gen.n_channels))
        _, drift = oqt_increment(random_state[None], gen, zeros)
        _, expected = channel_sum_increments(random_state, gen, zeros[0])
        np.testing.assert_allclose(drift[0], expected, rtol=0, atol=1e-12)

    def test_noise_matches_channel_sum(self, ladder, random_state):
        _, _, target = ladder
        gen = OQTGenerator(1.3, target)
        dw = WienerSource(4, 0).block(1, gen.n_channels, 0.01)
        noise, _ = oqt_increment(random_state[None], gen, dw)
        expected, _ = channel_sum_increments(random_state, gen, dw[0])
        np.testing.assert_allclose(noise[0], expected, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("level", [0, 3, 7])
    def test_eigenstate_with_its_own_window_is_fixed(self, ladder, level):
        model, _, _ = ladder
        eigenstate = StateVector.basis(8, level)
        target = build_microcanonical(eigenstate, model)
        assert target.members == (level,)
        gen = OQTGenerator(1.0, target)
        dt = 0.01
        psi = eigenstate
        for stream in range(20):
            psi = oqt_step(psi, gen, model, dt, WienerSource(stream, stream))
        expected = np.exp(-1j * model.energies[level] * 20 * dt) * eigenstate.amplitudes
        np.testing.assert_allclose(psi.amplitudes, expected, rtol=0, atol=1e-12)


@pytest.mark.unit
class TestSectorCollapse:
    """Test cases for the long-time behaviour of SUV trajectories."""

    def test_every_trajectory_ends_in_one_sector(self, ladder):
        model, psi0, _ = ladder
        suv = SUVGenerator.contiguous(8, 2, 1.0)
        sources = [WienerSource(6, k) for k in range(200)]
        records = integrate_batch(psi0, [suv], model, 0.01, 4000, sources, sample_stride=4000)
        terminal = np.stack([r.sector_weights[-1] for r in records])
        assert np.max(np.minimum(terminal, 1.0 - terminal)) <= 1e-6
        np.testing.assert_allclose(terminal.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.unit
class TestIntegration:
    """Test cases for integrate_trajectory and integrate_batch."""

    def test_deterministic_given_stream(self, ladder):
        model, psi0, target = ladder
        gens = [OQTGenerator(1.0, target), SUVGenerator.contiguous(8, 2, 1.0)]
        a = integrate_trajectory(psi0, gens, model, 0.01, 50, WienerSource(9, 4))
        b = integrate_trajectory(psi0, gens, model, 0.01, 50, WienerSource(9, 4))
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)

    def test_noise_block_size_does_not_matter(self, ladder):
        model, psi0, target = ladder
        gens = [OQTGenerator(1.0, target)]
        (a,) = integrate_batch(psi0, gens, model, 0.01, 40, [WienerSource(2, 0)], noise_block=7)
        (b,) = integrate_batch(psi0, gens, model, 0.01, 40, [WienerSource(2, 0)], noise_block=256)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)

    def test_batch_matches_single_runs(self, ladder):
        model, psi0, target = ladder
        gens = [OQTGenerator(1.0, target)]
        batch = integrate_batch(psi0, gens, model, 0.01, 30, [WienerSource(2, k) for k in range(3)])
        single = integrate_trajectory(psi0, gens, model, 0.01, 30, WienerSource(2, 1))
        np.testing.assert_allclose(batch[1].amplitudes, single.amplitudes, rtol=0, atol=1e-13)

    def test_sampling_grid(self, ladder):
        model, psi0, target = ladder
        rec = integrate_trajectory(
            psi0, [OQTGenerator(1.0, target)], model, 0.01, 20, WienerSource(0), sample_stride=5
        )
        np.testing.assert_allclose(rec.times, [0.0, 0.05, 0.1, 0.15, 0.2])
        assert rec.step_residuals.shape == (20,)
        assert rec.norm_residual[0] == 0.0

    def test_observer_stride_must_divide(self, ladder):
        model, psi0, target = ladder
        obs = Observable.diagonal(model.energies, "H")
        with pytest.raises(ContractViolation, match="multiple"):
            integrate_trajectory(
                psi0, [OQTGenerator(1.0, target)], model, 0.01, 20, WienerSource(0),
                observers=[(obs, 3)], sample_stride=2,
            )

    def test_coarse_observer_holds_nan(self, ladder):
        model, psi0, target = ladder
        obs = Observable.diagonal(model.energies, "H")
        rec = integrate_trajectory(
            psi0, [OQTGenerator(1.0, target)], model, 0.01, 8, WienerSource(0),
            observers=[(obs, 4)], sample_stride=2,
        )
        values = rec.expectations["H"]
        assert np.isnan(values[1]) and np.isnan(values[3])
        np.testing.assert_allclose(values[[0, 2, 4]], rec.energy_mean[[0, 2, 4]], atol=1e-12)

    def test_two_oqt_generators_rejected(self, ladder):
        model, psi0, target = ladder
        gens = [OQTGenerator(1.0, target), OQTGenerator(1.0, target)]
        with pytest.raises(ContractViolation, match="at most one"):
            integrate_trajectory(psi0, gens, model, 0.01, 5, WienerSource(0))

    def test_norm_residual_cancels_on_average(self, ladder):
        model, psi0, target = ladder
        dt = 0.01
        sources = [WienerSource(0, k) for k in range(200)]
        records = integrate_batch(psi0, [OQTGenerator(1.0, target)], model, dt, 100, sources)
        mean = float(np.mean([r.step_residuals for r in records]))
        assert abs(mean) <= 0.1 * dt

    def test_sector_weights_recorded_with_suv(self, ladder):
        model, psi0, _ = ladder
        rec = integrate_trajectory(
            psi0, [SUVGenerator.contiguous(8, 2, 1.0)], model, 0.01, 10, WienerSource(0)
        )
        np.testing.assert_allclose(rec.sector_weights.sum(axis=1), 1.0, atol=1e-12)
        assert "z_1" in rec.columns()


@pytest.mark.unit
class TestEnsemblePool:
    """Test cases for run_trajectory_ensemble."""

    def test_batching_does_not_change_results(self, ladder):
        model, psi0, target = ladder
        gens = [OQTGenerator(1.0, target)]
        a = run_trajectory_ensemble(psi0, gens, model, 0.01, 20, 10, 4, batch_size=3)
        b = run_trajectory_ensemble(psi0, gens, model, 0.01, 20, 10, 4, batch_size=10)
        np.testing.assert_allclose(a.populations(), b.populations(), rtol=0, atol=1e-13)
        assert [r.stream_id for r in a.records] == list(range(10))

    def test_mean_projector_shapes(self, ladder):
        model, psi0, target = ladder
        ens = run_trajectory_ensemble(
            psi0, [OQTGenerator(1.0, target)], model, 0.01, 10, 5, 0, sample_stride=5
        )
        mean, err_re, err_im = ens.mean_projector()
        assert mean.shape == (3, 8, 8)
        assert err_re.shape == err_im.shape == mean.shape
        np.testing.assert_allclose(np.trace(mean, axis1=1, axis2=2).real, 1.0, atol=1e-12)

    def test_needs_trajectories(self, ladder):
        model, psi0, target = ladder
        with pytest.raises(ContractViolation):
            run_trajectory_ensemble(psi0, [OQTGenerator(1.0, target)], model, 0.01, 10, 0, 0)

    def test_exact_sum_ignores_term_order(self):
        values = np.array([[1e16, 1.0], [1.0, 2.0], [-1e16, 3.0]])
        forward = exact_sum(values)
        backward = exact_sum(values[::-1])
        np.testing.assert_array_equal(forward, [1.0, 6.0])
        np.testing.assert_array_equal(forward, backward)

    def test_exact_sum_complex(self):
        values = np.array([1e16 + 1j, 1.0 - 1e16j, -1e16 + 1e16j])
        assert exact_sum(values) == 1.0 + 1.0j
