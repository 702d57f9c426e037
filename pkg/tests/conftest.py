"""Pytest configuration and fixtures."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))


@pytest.fixture(autouse=True)
def reset_singletons():
    """Reset the cached runtime configuration around each test."""
    from oqt_sim.config import settings

    settings._config = None
    yield
    settings._config = None


@pytest.fixture
def clean_env(monkeypatch):
    """Remove every OQT_ variable so defaults apply."""
    import os

    for name in list(os.environ):
        if name.startswith("OQT_"):
            monkeypatch.delenv(name, raising=False)
    return monkeypatch


@pytest.fixture
def test_config():
    """Runtime configuration for tests: one worker, plain-text logs."""
    from oqt_sim.config.settings import Config, Environment, ExecutionConfig, MonitoringConfig

    return Config(
        environment=Environment.TESTING,
        execution=ExecutionConfig(workers=1),
        monitoring=MonitoringConfig(log_level="WARNING", json_logging=False),
    )


@pytest.fixture
def four_levels():
    """Evenly spaced four-level spectrum."""
    from oqt_sim.core.states import SpectralModel

    return SpectralModel(np.array([0.0, 1.0, 2.0, 3.0]))


@pytest.fixture
def ladder():
    """Eight-level random ladder, its Gaussian initial state and microcanonical target."""
    from oqt_sim.experiments.base import build_fig1_hamiltonian, build_fig1_state
    from oqt_sim.targets.microcanonical import build_microcanonical

    model = build_fig1_hamiltonian(0, 8)
    psi0 = build_fig1_state(model, 0)
    return model, psi0, build_microcanonical(psi0, model)


@pytest.fixture
def oqt_model(ladder):
    """OQT-only master-equation model on the ladder with alpha_eff = 1."""
    from oqt_sim.dynamics.ensemble import GKSLModel
    from oqt_sim.dynamics.generators import OQTGenerator

    model, _, target = ladder
    return GKSLModel(model, oqt=OQTGenerator(1.0, target))


@pytest.fixture
def restore_root_logger():
    """Put back the root handlers replaced by setup_structured_logging."""
    import logging

    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers = handlers
    root.setLevel(level)
