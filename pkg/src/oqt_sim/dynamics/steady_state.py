"""Steady states of the hybrid master equation from the Liouvillian null space."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from scipy.linalg import null_space, svd

from oqt_sim.core.states import DensityMatrix
from oqt_sim.dynamics.ensemble import GKSLModel
from oqt_sim.errors import ContractViolation, InternalError
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

NULL_RCOND = 1e-10
RESIDUAL_TOL = 1e-10


def liouvillian(m: GKSLModel) -> np.ndarray:
    """The d^2 x d^2 generator acting on row-major vec(rho), vec[i*d + j] = rho_ij."""
    d = m.dim
    energies = m.model.energies
    eye = np.eye(d)
    identity = np.eye(d * d, dtype=np.complex128)

    # vec(A rho B) = (A kron B^T) vec(rho) for row-major vectorization
    h = np.diag(energies).astype(np.complex128)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))

    if m.oqt is not None:
        chi = np.diag(m.oqt.chi).astype(np.complex128)
        lv += m.alpha_eff * (np.outer(chi.reshape(-1), eye.reshape(-1)) - identity)

    if m.suv is not None:
        same = m.suv.same_sector_mask().reshape(-1).astype(np.float64)
        lv += m.j_eff * (np.diag(same) - identity)

    return lv


@dataclass
class SteadyStateReport:
    """Steady state with its residual and the null-space diagnostics."""

    state: DensityMatrix
    residual: float
    null_dimension: int
    degenerate: bool
    smallest_singular_values: List[float]
    basis: List[np.ndarray] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "residual": self.residual,
            "null_dimension": self.null_dimension,
            "degenerate": self.degenerate,
            "smallest_singular_values": self.smallest_singular_values,
            "diagonal": [float(p) for p in self.state.populations],
            "basis": [
                {"real": b.real.tolist(), "imag": b.imag.tolist()} for b in self.basis
            ] if self.degenerate else [],
        }


def hybrid_steady_state(m: GKSLModel) -> SteadyStateReport:
    """Solve L(rho) = 0 with Tr rho = 1 by singular-value null-space extraction."""
    if m.oqt is None or m.alpha_eff <= 0:
        raise ContractViolation("hybrid_steady_state needs an OQT generator with alpha_eff > 0")

    d = m.dim
    lv = liouvillian(m)
    singular = svd(lv, compute_uv=False)
    kernel = null_space(lv, rcond=NULL_RCOND)
    if kernel.shape[1] == 0:
        # numerically full rank: fall back to the weakest right-singular vector
        _, _, vh = svd(lv)
        kernel = vh[-1].conj()[:, None]

    basis = [kernel[:, k].reshape(d, d) for k in range(kernel.shape[1])]
    traces = np.array([np.trace(b) for b in basis])
    pick = int(np.argmax(np.abs(traces)))
    if abs(traces[pick]) < 1e-12:
        raise InternalError("steady-state null space has no trace-carrying direction")

    degenerate = kernel.shape[1] > 1
    if degenerate:
        logger.warning(
            "Steady state is degenerate",
            extra={"null_dimension": kernel.shape[1], "traces": [complex(t) for t in traces]},
        )

    mat = basis[pick] / traces[pick]
    mat = 0.5 * (mat + mat.conj().T)
    smallest = float(np.linalg.eigvalsh(mat)[0])
    if smallest < -1e-9:
        raise InternalError(
            f"steady state is not positive semidefinite (eigenvalue {smallest:.3e})"
        )

    residual = float(np.linalg.norm(lv @ mat.reshape(-1)))
    if residual > RESIDUAL_TOL:
        raise InternalError(f"steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL}")

    report = SteadyStateReport(
        state=DensityMatrix(mat),
        residual=residual,
        null_dimension=int(kernel.shape[1]),
        degenerate=degenerate,
        smallest_singular_values=[float(s) for s in singular[-3:]],
        basis=basis,
    )
    logger.info(
        "Steady state solved",
        extra={"residual": residual, "null_dimension": report.null_dimension},
    )
    return report
