import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("HFB_CLI", str(ROOT / "build" / "hfb_cli"))
    if not os.path.exists(path):
        pytest.skip("hfb_cli not built")
    return path


@pytest.fixture(scope="session")
def root():
    return ROOT
