import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# Criterion id -> (status, detail); filled in by test_acceptance.
ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split("-")[1])):
        status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key:7s} {status:4s}  {detail}")
