"""Entropy and energy laws of the OQT master equation, checked on records."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from oqt_sim.core.functionals import relative_entropy, von_neumann_entropy
from oqt_sim.core.states import DensityMatrix, SpectralModel
from oqt_sim.dynamics.ensemble import EnsembleRecord, GKSLModel, gksl_rhs
from oqt_sim.dynamics.generators import OQTGenerator
from oqt_sim.errors import ContractViolation, InsufficientDataError
from oqt_sim.targets import MicrocanonicalTarget, Target, as_density
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

RHS_FLOOR = 1e-8
RHS_SHARE_FLOOR = 0.05
WARMUP_SPACINGS = 10
BOOKKEEPING_TOL = 1e-9
MONOTONICITY_TOL = 1e-10
SUPPORT_TOL = 1e-12


def _spacing(times: np.ndarray) -> float:
    if times.size < 3:
        raise InsufficientDataError(f"need at least 3 samples, got {times.size}")
    steps = np.diff(times)
    h = float(steps[0])
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-9 * max(1.0, h):
        raise ContractViolation("record must be sampled on a uniform time grid")
    return h


def _oqt_alpha(record: EnsembleRecord, alpha_eff: Optional[float]) -> float:
    if float(record.meta.get("j_eff", 0.0)) != 0.0:
        raise ContractViolation("law checks need an OQT-only record")
    if alpha_eff is None:
        alpha_eff = float(record.meta.get("alpha_eff", 0.0))
    return float(alpha_eff)


@dataclass
class EntropyLawReport:
    """Finite-difference dS/dt against alpha (D[chi||rho] + H_chi - S)."""

    max_relative_error: float
    n_checked: int
    n_flagged: int
    warmup: float
    times: np.ndarray = field(repr=False)
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)

    def passed(self, tolerance: float) -> bool:
        return self.n_checked > 0 and self.max_relative_error <= tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_relative_error": self.max_relative_error,
            "n_checked": self.n_checked,
            "n_flagged": self.n_flagged,
            "warmup": self.warmup,
        }


def entropy_law_check(
    record: EnsembleRecord,
    target: Target,
    alpha_eff: Optional[float] = None,
    warmup: Optional[float] = None,
    scheme: str = "central",
) -> EntropyLawReport:
    """Compare finite-difference dS/dt with the entropy law at interior samples.

    ``scheme`` is "central" (second order) or "forward" (first order).
    Samples where the right side is infinite (support of chi outside that of
    rho) are flagged and skipped; so are samples earlier than ``warmup``
    (default: ten sample spacings) and samples where |rhs| is below 1e-8 or
    below 5% of its largest value, since the entropy can overshoot log Omega
    and its rate then passes through zero.
    """
    if scheme not in ("central", "forward"):
        raise ContractViolation(f"unknown finite-difference scheme '{scheme}'")
    alpha = _oqt_alpha(record, alpha_eff)
    times = record.times
    h = _spacing(times)
    warmup = WARMUP_SPACINGS * h if warmup is None else float(warmup)

    chi = as_density(target)
    h_chi = von_neumann_entropy(chi)
    entropy = record.series["entropy"]

    checked_t: List[float] = []
    lhs_values: List[float] = []
    rhs_values: List[float] = []
    flagged = 0
    for k in range(1, times.size - 1):
        divergence = relative_entropy(chi, record.states[k])
        if math.isinf(divergence):
            flagged += 1
            continue
        if times[k] < warmup:
            continue
        rhs = alpha * (divergence + h_chi - entropy[k])
        if abs(rhs) < RHS_FLOOR:
            continue
        if scheme == "central":
            lhs = (entropy[k + 1] - entropy[k - 1]) / (2.0 * h)
        else:
            lhs = (entropy[k + 1] - entropy[k]) / h
        checked_t.append(float(times[k]))
        lhs_values.append(lhs)
        rhs_values.append(rhs)

    lhs_arr = np.array(lhs_values)
    rhs_arr = np.array(rhs_values)
    if rhs_arr.size:
        keep = np.abs(rhs_arr) >= RHS_SHARE_FLOOR * np.max(np.abs(rhs_arr))
        checked_t = list(np.array(checked_t)[keep])
        lhs_arr, rhs_arr = lhs_arr[keep], rhs_arr[keep]
    rel = np.abs(lhs_arr - rhs_arr) / np.abs(rhs_arr) if rhs_arr.size else np.array([np.inf])
    return EntropyLawReport(
        max_relative_error=float(np.max(rel)),
        n_checked=int(rhs_arr.size),
        n_flagged=flagged,
        warmup=warmup,
        times=np.array(checked_t),
        lhs=lhs_arr,
        rhs=rhs_arr,
    )


@dataclass
class EntropyMonotonicityReport:
    """Smallest sample-to-sample entropy change and the overshoot above H(chi).

    The bound is enforced only when the target is microcanonical and the
    initial state lives inside its window; the generator is then unital on
    the window subspace. Other records report their numbers without failing.
    """

    min_increment: float
    overshoot: float
    outside_weight: float
    enforced: bool
    n_samples: int

    def passed(self, tolerance: float = MONOTONICITY_TOL) -> bool:
        return not self.enforced or self.min_increment >= -tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "min_increment": self.min_increment,
            "overshoot": self.overshoot,
            "outside_weight": self.outside_weight,
            "enforced": self.enforced,
            "n_samples": self.n_samples,
        }


def entropy_monotonicity_check(
    record: EnsembleRecord, target: Target
) -> EntropyMonotonicityReport:
    """Check S(t_{k+1}) >= S(t_k) on an OQT-only or hybrid record."""
    entropy = record.series["entropy"]
    if entropy.size < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {entropy.size}")
    if isinstance(target, MicrocanonicalTarget):
        outside = target.outside_weight(record.states[0])
    else:
        outside = float("nan")
    report = EntropyMonotonicityReport(
        min_increment=float(np.min(np.diff(entropy))),
        overshoot=float(np.max(entropy)) - von_neumann_entropy(as_density(target)),
        outside_weight=outside,
        enforced=bool(outside <= SUPPORT_TOL),
        n_samples=int(entropy.size),
    )
    if not report.enforced and report.min_increment < -MONOTONICITY_TOL:
        logger.info(
            "Entropy falls back after overshooting",
            extra={"overshoot": report.overshoot, "min_increment": report.min_increment},
        )
    return report


def energy_rates(
    rho: DensityMatrix, target: Target, model: SpectralModel, alpha_eff: float
) -> Tuple[float, float]:
    """Exact d<H>/dt and d<H^2>/dt under the OQT master equation."""
    energies = model.energies
    chi = np.asarray(target.weights, dtype=np.float64)
    p = rho.populations
    first = alpha_eff * float(chi @ energies - p @ energies)
    second = alpha_eff * float(chi @ energies**2 - p @ energies**2)
    return first, second


def variance_rate(
    rho: DensityMatrix, target: Target, model: SpectralModel, alpha_eff: float
) -> float:
    """d Var(H) / dt = d<H^2>/dt - 2 <H> d<H>/dt."""
    first, second = energy_rates(rho, target, model, alpha_eff)
    mean = float(rho.populations @ model.energies)
    return second - 2.0 * mean * first


@dataclass
class EnergyBookkeepingReport:
    """Energy drift of a record against alpha (Tr[chi H] - Tr[rho H])."""

    epsilon_e: float
    initial_drift: float
    max_generator_error: float
    max_finite_difference_error: float

    @property
    def passed(self) -> bool:
        return self.max_generator_error <= BOOKKEEPING_TOL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon_e": self.epsilon_e,
            "initial_drift": self.initial_drift,
            "max_generator_error": self.max_generator_error,
            "max_finite_difference_error": self.max_finite_difference_error,
        }


def energy_bookkeeping_check(
    record: EnsembleRecord, target: Target, model: SpectralModel, alpha_eff: Optional[float] = None
) -> EnergyBookkeepingReport:
    """Measure d<H>/dt two ways and compare with the predicted drift.

    The generator measurement applies the master equation to each snapshot;
    the finite-difference one differentiates the sampled energy series.
    ``epsilon_e`` is Tr[chi H] - E(0), so the initial drift is alpha * epsilon_e.
    """
    alpha = _oqt_alpha(record, alpha_eff)
    m = GKSLModel(model, oqt=OQTGenerator(alpha, target))
    energies = model.energies
    chi_energy = float(np.asarray(target.weights) @ energies)
    energy = record.series["energy"]

    predicted = alpha * (chi_energy - energy)
    measured = np.array(
        [float(np.real(np.diag(gksl_rhs(rho, m))) @ energies) for rho in record.states]
    )
    generator_error = float(np.max(np.abs(measured - predicted)))

    fd_error = float("nan")
    if record.n_samples >= 3:
        h = _spacing(record.times)
        fd = (energy[2:] - energy[:-2]) / (2.0 * h)
        fd_error = float(np.max(np.abs(fd - predicted[1:-1])))

    epsilon = chi_energy - float(energy[0])
    return EnergyBookkeepingReport(
        epsilon_e=epsilon,
        initial_drift=alpha * epsilon,
        max_generator_error=generator_error,
        max_finite_difference_error=fd_error,
    )
