import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from latticetft.library import standard_signature  # noqa: E402
from latticetft.tft import TFT  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
SCENES = ROOT / "demos" / "scenes"


@pytest.fixture(scope="session")
def sig():
    return standard_signature()


@pytest.fixture(scope="session")
def T(sig):
    return TFT(sig)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
