"""Shared pytest fixtures and configuration."""

import json
import logging
from pathlib import Path
from typing import Any, Dict

import pytest

from specsense.config import Scenario, SimulationSettings
from specsense.simulator.engine import MonteCarloEngine
from specsense.wishart.core import RngStream, sample_covariance, sample_standard_complex_gaussian

LOW_SNR_SPECTRUM = [1.6225, 1.2217, 1.1213, 1.0]
HIGH_SNR_SPECTRUM = [4.0417, 2.2375, 1.56, 1.0]


@pytest.fixture
def rng():
    """A fixed random stream."""
    return RngStream(seed=20240601)


@pytest.fixture
def random_covariance():
    """Sample covariance of a 4 x 12 complex Gaussian matrix."""
    X = sample_standard_complex_gaussian(4, 12, RngStream(7))
    return sample_covariance(X)


@pytest.fixture
def settings():
    """Small, fast run settings."""
    return SimulationSettings(seed=11, trials=4000, threads=1, chunk_size=1000)


@pytest.fixture
def engine():
    """Single-threaded engine with small chunks."""
    with MonteCarloEngine(threads=1, chunk_size=1000) as mc:
        yield mc


@pytest.fixture
def low_snr_scenario():
    """Three weak users, K=4, N=400, given by their covariance spectrum."""
    return Scenario(
        K=4,
        N=400,
        snrs_db=[-6.0, -5.0, -4.0],
        sigma_spectrum=LOW_SNR_SPECTRUM,
        seed=5,
        trials=4000
    )


@pytest.fixture
def white_scenario():
    """No primary users: H1 coincides with H0."""
    return Scenario(K=4, N=50, snrs_db=[], seed=9, trials=4000)


@pytest.fixture
def roc_document() -> Dict[str, Any]:
    """A ROC scenario document as written to disk."""
    return {
        "scenario": {
            "K": 4,
            "N": 50,
            "snrs_db": [1.0, 2.0, 3.0],
            "sigma_spectrum": HIGH_SNR_SPECTRUM,
            "seed": 3,
            "trials": 2000,
            "calibration_trials": 20000
        },
        "detectors": ["john", "st", "sle"],
        "pfa_grid": [0.05, 0.1, 0.2]
    }


@pytest.fixture
def roc_file(tmp_path: Path, roc_document: Dict[str, Any]) -> Path:
    """ROC scenario document written to a temporary file."""
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(roc_document), encoding="utf-8")
    return path


@pytest.fixture(autouse=True)
def clear_specsense_env(monkeypatch):
    """Keep SPECSENSE_* variables from the outer environment out of tests."""
    for name in ("SPECSENSE_SEED", "SPECSENSE_THREADS", "SPECSENSE_CHUNK_SIZE", "SPECSENSE_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    yield


@pytest.fixture(autouse=True)
def reset_specsense_logging():
    """Drop handlers bound to streams captured by a previous test."""
    yield
    logger = logging.getLogger("specsense")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
