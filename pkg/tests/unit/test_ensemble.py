"""Unit tests for the master equation and its steady state."""

import numpy as np
import pytest

from oqt_sim.core.states import DensityMatrix, Observable, StateVector
from oqt_sim.dynamics.ensemble import (
    GKSLModel,
    analytic_oqt_solution,
    gksl_rhs,
    propagate,
    rk4_step,
)
from oqt_sim.dynamics.generators import OQTGenerator, SUVGenerator
from oqt_sim.dynamics.steady_state import hybrid_steady_state, liouvillian
from oqt_sim.errors import ContractViolation, StepSizeError
from oqt_sim.targets import as_density, build_canonical


@pytest.mark.unit
class TestGKSLModel:
    """Test cases for GKSLModel and the right-hand side."""

    def test_needs_a_generator(self, ladder):
        model, _, _ = ladder
        with pytest.raises(ContractViolation, match="unitary_only"):
            GKSLModel(model)

    def test_unitary_only_excludes_generators(self, ladder):
        model, _, target = ladder
        with pytest.raises(ContractViolation):
            GKSLModel(model, oqt=OQTGenerator(1.0, target), unitary_only=True)

    def test_rhs_is_traceless(self, oqt_model, ladder):
        _, psi0, _ = ladder
        assert abs(np.trace(gksl_rhs(psi0.projector(), oqt_model))) < 1e-12

    def test_target_is_stationary(self, oqt_model, ladder):
        _, _, target = ladder
        np.testing.assert_allclose(gksl_rhs(as_density(target), oqt_model), 0.0, atol=1e-14)

    def test_rhs_matches_liouvillian(self, ladder):
        model, psi0, target = ladder
        m = GKSLModel(model, oqt=OQTGenerator(0.7, target), suv=SUVGenerator.contiguous(8, 3, 1.3))
        rho = psi0.projector()
        via_matrix = (liouvillian(m) @ rho.entries.reshape(-1)).reshape(8, 8)
        np.testing.assert_allclose(gksl_rhs(rho, m), via_matrix, atol=1e-12)

    @pytest.mark.parametrize("hybrid", [False, True])
    def test_rhs_matches_explicit_lindblad_sum(self, ladder, hybrid):
        """Closed form against the dissipator summed over |mu><nu| and the sector projectors."""
        model, _, target = ladder
        d = model.dim
        rng = np.random.default_rng(17)
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = DensityMatrix(g @ g.conj().T / np.trace(g @ g.conj().T).real)

        oqt = OQTGenerator(1.3, target)
        suv = SUVGenerator(0.8, ((0, 1, 2), (3,), (4, 5, 6, 7))) if hybrid else None
        m = GKSLModel(model, oqt=oqt, suv=suv)

        def dissipator(op, r):
            op_dag = op.conj().T
            return op @ r @ op_dag - 0.5 * (op_dag @ op @ r + r @ op_dag @ op)

        h = model.hamiltonian()
        expected = -1j * (h @ rho.entries - rho.entries @ h)
        for mu in target.members:
            for nu in range(d):
                jump = np.zeros((d, d), dtype=complex)
                jump[mu, nu] = 1.0
                expected += oqt.rates[mu] * dissipator(jump, rho.entries)
        if suv is not None:
            for sector in suv.projectors:
                proj = np.zeros((d, d), dtype=complex)
                proj[list(sector), list(sector)] = 1.0
                expected += suv.j_eff * dissipator(proj, rho.entries)

        np.testing.assert_allclose(gksl_rhs(rho, m), expected, rtol=0, atol=1e-12)

    def test_rk4_integrates_exponential(self):
        out = rk4_step(np.array([[1.0 + 0j]]), lambda m: -m, 0.1)
        assert out[0, 0].real == pytest.approx(np.exp(-0.1), rel=1e-6)


@pytest.mark.unit
class TestPropagate:
    """Test cases for propagate."""

    def test_matches_analytic_solution(self, oqt_model, ladder):
        model, psi0, target = ladder
        rho0 = psi0.projector()
        record = propagate(rho0, oqt_model, 1e-3, 2000, sample_stride=500)
        for t, rho in zip(record.times, record.states):
            exact = analytic_oqt_solution(rho0, target, model, 1.0, t)
            np.testing.assert_allclose(rho.entries, exact.entries, atol=1e-9)

    def test_trace_and_positivity(self, oqt_model, ladder):
        _, psi0, _ = ladder
        record = propagate(psi0.projector(), oqt_model, 1e-2, 300, sample_stride=10)
        for rho in record.states:
            assert rho.trace() == pytest.approx(1.0, abs=1e-12)
            assert rho.eigenvalues()[0] > -1e-9

    def test_guard(self, ladder):
        model, psi0, target = ladder
        m = GKSLModel(model, oqt=OQTGenerator(3.0, target), suv=SUVGenerator.contiguous(8, 2, 3.0))
        with pytest.raises(StepSizeError):
            propagate(psi0.projector(), m, 0.01, 10)

    def test_trace_distance_decays_at_twice_alpha(self, oqt_model, ladder):
        _, psi0, _ = ladder
        record = propagate(psi0.projector(), oqt_model, 1e-3, 1000, sample_stride=1000)
        d0, d1 = record.series["trace_distance"]
        assert d1 / d0 == pytest.approx(np.exp(-2.0), rel=1e-8)

    def test_unitary_keeps_populations(self, ladder):
        model, psi0, _ = ladder
        record = propagate(psi0.projector(), GKSLModel(model, unitary_only=True), 0.01, 100, 50)
        np.testing.assert_allclose(record.diagonals[-1], psi0.populations, atol=1e-12)
        assert "trace_distance" not in record.series

    def test_suv_keeps_sector_populations(self, ladder):
        model, psi0, _ = ladder
        m = GKSLModel(model, suv=SUVGenerator.contiguous(8, 2, 1.0))
        record = propagate(psi0.projector(), m, 0.01, 200, 20)
        sectors = record.series["sector_populations"]
        np.testing.assert_allclose(sectors - sectors[0], 0.0, atol=1e-12)

    def test_cross_sector_coherence_decays_at_j(self, ladder):
        model, psi0, _ = ladder
        m = GKSLModel(model, suv=SUVGenerator.contiguous(8, 2, 1.0))
        record = propagate(psi0.projector(), m, 1e-3, 1000, 1000)
        start, end = record.states[0].entries[0, 7], record.states[-1].entries[0, 7]
        assert abs(end) == pytest.approx(abs(start) * np.exp(-1.0), rel=1e-8)

    def test_observables_are_recorded(self, oqt_model, ladder):
        model, psi0, _ = ladder
        h = Observable.diagonal(model.energies, "H")
        record = propagate(psi0.projector(), oqt_model, 0.01, 20, 10, observables=[h])
        np.testing.assert_allclose(record.observables["H"], record.series["energy"])
        assert set(record.columns()) >= {"t", "H", "entropy", "trace_distance", "p_0"}

    def test_dimension_mismatch(self, oqt_model):
        with pytest.raises(ContractViolation):
            propagate(DensityMatrix.maximally_mixed(3), oqt_model, 0.01, 5)


@pytest.mark.unit
class TestSteadyState:
    """Test cases for hybrid_steady_state."""

    def test_oqt_steady_state_is_target(self, oqt_model, ladder):
        _, _, target = ladder
        report = hybrid_steady_state(oqt_model)
        np.testing.assert_allclose(report.state.entries, as_density(target).entries, atol=1e-10)
        assert report.residual <= 1e-10
        assert not report.degenerate

    def test_suv_does_not_move_the_steady_state(self, ladder):
        model, _, target = ladder
        m = GKSLModel(model, oqt=OQTGenerator(0.5, target), suv=SUVGenerator.contiguous(8, 2, 2.0))
        report = hybrid_steady_state(m)
        np.testing.assert_allclose(report.state.entries, as_density(target).entries, atol=1e-10)

    def test_canonical_target(self, ladder):
        model, _, _ = ladder
        target = build_canonical(4.0, model)
        report = hybrid_steady_state(GKSLModel(model, oqt=OQTGenerator(1.0, target)))
        np.testing.assert_allclose(report.state.populations, target.weights, atol=1e-10)

    def test_needs_oqt(self, ladder):
        model, _, _ = ladder
        with pytest.raises(ContractViolation):
            hybrid_steady_state(GKSLModel(model, suv=SUVGenerator.contiguous(8, 2, 1.0)))

    def test_report_to_dict(self, oqt_model):
        data = hybrid_steady_state(oqt_model).to_dict()
        assert data["null_dimension"] == 1
        assert data["basis"] == []

    def test_pure_initial_state_reaches_target(self, oqt_model, ladder):
        model, _, target = ladder
        psi = StateVector.basis(8, 0)
        record = propagate(psi.projector(), oqt_model, 0.05, 800, 800)
        final = record.states[-1].entries
        np.testing.assert_allclose(final, as_density(target).entries, atol=1e-12)
