import warnings
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SCHEMAS = ROOT / "docs" / "schemas"
CONFIGS = ROOT / "configs"


@pytest.fixture
def schemas():
    return SCHEMAS


@pytest.fixture
def configs():
    return CONFIGS


@pytest.fixture(autouse=True)
def _quiet_grid_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*admissible region.*")
        yield
