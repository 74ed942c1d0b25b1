from importlib import resources

import pytest

from edgeadapt.fsm import load_fsm
from edgeadapt.objectives import load_device_model, oracle_store
from edgeadapt.pareto import extract_front
from edgeadapt.space import load_space
from edgeadapt.wgra import load_mode_specs, select_modes

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def space():
    return load_space(resources.files("edgeadapt").joinpath("data/pedestrian_space.yaml"))


@pytest.fixture(scope="session")
def params():
    return load_device_model()


@pytest.fixture(scope="session")
def evaluator(space, params):
    return params.evaluator(space)


@pytest.fixture(scope="session")
def full_store(space, evaluator):
    return oracle_store(space, evaluator)


@pytest.fixture(scope="session")
def oracle_front(full_store):
    return extract_front(full_store)


@pytest.fixture(scope="session")
def mode_specs():
    return load_mode_specs()


@pytest.fixture(scope="session")
def modes(oracle_front, mode_specs):
    return {m.name: m for m in select_modes(oracle_front, mode_specs)}


@pytest.fixture(scope="session")
def fsm_spec(modes):
    return load_fsm(modes=modes)


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion."""

    def _record(criterion: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
