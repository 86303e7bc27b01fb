import json
from pathlib import Path

import pytest

from hubscan.pipeline import load_scan_config
from hubscan.scripts import load_api_table
from hubscan.taint import load_taint_config

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def pickle_fixtures() -> dict:
    raw = json.loads((FIXTURES / "pickle_fixtures.json").read_text())
    return {fx["name"]: fx for fx in raw}


@pytest.fixture(scope="session")
def scan_config():
    return load_scan_config()


@pytest.fixture(scope="session")
def api_table():
    return load_api_table()


@pytest.fixture(scope="session")
def taint_config():
    return load_taint_config()
