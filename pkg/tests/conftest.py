import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from qotto.experiments import PRESETS  # noqa: E402

settings.register_profile("thorough", max_examples=2000, deadline=None)


@pytest.fixture(params=sorted(PRESETS))
def preset_config(request):
    return PRESETS[request.param]


@pytest.fixture
def fig2ab():
    return PRESETS["fig2ab"]


@pytest.fixture
def fig2d():
    return PRESETS["fig2d"]


@pytest.fixture
def fig3():
    return PRESETS["fig3"]


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one verdict line per acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE[number] = (ok, detail)
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
