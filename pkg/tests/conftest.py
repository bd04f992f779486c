import pytest

from vo2lif.config import config_from_flat
from vo2lif.device import SwitchParams
from vo2lif.scenarios import PresetName, preset_document


@pytest.fixture
def params():
    return SwitchParams()


def preset_config(name, **overrides):
    """Resolved SimConfig of a preset with flat-key overrides."""
    return config_from_flat(preset_document(PresetName(name), overrides))


@pytest.fixture
def fig4a():
    return preset_config("fig4a_subthreshold")


@pytest.fixture
def fig4b():
    return preset_config("fig4b_fire")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
