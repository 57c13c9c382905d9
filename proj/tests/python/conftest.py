import os
import shutil

import pytest


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("WEAKMEAS_CLI") or shutil.which("weakmeas")
    if not path:
        pytest.skip("weakmeas CLI not available; set WEAKMEAS_CLI")
    return path
