"""Law checks, decay fits and Martingale reports on dynamics records."""

from oqt_sim.analysis.constraints import (
    energy_constraint,
    generic_rhs,
    product_rates,
    steady_state_constraint,
)
from oqt_sim.analysis.fitting import DecayFit, envelope_decay_rate, trace_distance_decay_fit
from oqt_sim.analysis.laws import (
    energy_bookkeeping_check,
    energy_rates,
    entropy_law_check,
    variance_rate,
)
from oqt_sim.analysis.martingale import MartingaleBasis, Verdict, martingale_report

__all__ = [
    "DecayFit",
    "MartingaleBasis",
    "Verdict",
    "energy_bookkeeping_check",
    "energy_constraint",
    "energy_rates",
    "entropy_law_check",
    "envelope_decay_rate",
    "generic_rhs",
    "martingale_report",
    "product_rates",
    "steady_state_constraint",
    "trace_distance_decay_fit",
    "variance_rate",
]
