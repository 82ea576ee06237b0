import warnings

import numpy as np
import pytest

from slitlab.propagator import default_setup, run_double_slit


@pytest.fixture(scope="session")
def small_setup():
    return default_setup(256, cells_per_wavelength=6)


@pytest.fixture(scope="session")
def double_run(small_setup):
    grid, slits, cfg, packet = small_setup
    return run_double_slit(grid, slits, cfg, packet)


@pytest.fixture(scope="session")
def single_run(small_setup):
    grid, slits, cfg, packet = small_setup
    return run_double_slit(grid, slits.with_mode("single"), cfg, packet)


@pytest.fixture(scope="session")
def upper_run(small_setup):
    grid, slits, cfg, packet = small_setup
    return run_double_slit(grid, slits.with_mode("upper"), cfg, packet)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _quiet_paraxial():
    from slitlab.interference import ParaxialWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParaxialWarning)
        yield


_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; call with (passed, detail) before asserting."""
    label = request.node.get_closest_marker("criterion").args[0]

    def record(passed: bool, detail: str) -> bool:
        _ACCEPTANCE.append((label, bool(passed), detail))
        print(f"{label}: {'PASS' if passed else 'FAIL'} {detail}")
        return bool(passed)

    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split()[1])):
        terminalreporter.write_line(f"{label}: {'PASS' if passed else 'FAIL'}  {detail}")
