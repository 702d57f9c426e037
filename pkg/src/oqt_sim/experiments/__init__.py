"""Named experiments and the registry the runner dispatches on."""

from typing import Callable, Dict

from oqt_sim.config.scenario import ExperimentName, ScenarioConfig
from oqt_sim.experiments import appendix_a, custom, fig1, no_signalling
from oqt_sim.experiments.appendix_a import AppendixAReport, run_appendix_a
from oqt_sim.experiments.base import (
    ExperimentResult,
    build_fig1_hamiltonian,
    build_fig1_state,
    build_observables,
    resolve_observable,
)
from oqt_sim.experiments.custom import run_custom
from oqt_sim.experiments.fig1 import Fig1Scenario, run_fig1
from oqt_sim.experiments.no_signalling import NoSignallingReport, run_no_signalling

ExperimentRunner = Callable[..., ExperimentResult]

EXPERIMENTS: Dict[ExperimentName, ExperimentRunner] = {
    ExperimentName.FIG1: fig1.from_config,
    ExperimentName.NO_SIGNALLING: no_signalling.from_config,
    ExperimentName.APPENDIX_A: appendix_a.from_config,
    ExperimentName.CUSTOM: custom.from_config,
}


def get_experiment(name: ExperimentName) -> ExperimentRunner:
    return EXPERIMENTS[ExperimentName(name)]


__all__ = [
    "EXPERIMENTS",
    "AppendixAReport",
    "ExperimentResult",
    "Fig1Scenario",
    "NoSignallingReport",
    "ScenarioConfig",
    "build_fig1_hamiltonian",
    "build_fig1_state",
    "build_observables",
    "get_experiment",
    "resolve_observable",
    "run_appendix_a",
    "run_custom",
    "run_fig1",
    "run_no_signalling",
]
