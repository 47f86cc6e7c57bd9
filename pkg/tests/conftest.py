import numpy as np
import pytest

_ACCEPTANCE_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(text): ties a test to one acceptance criterion; the "
        "result is echoed as a PASS/FAIL line in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call":
        _ACCEPTANCE_RESULTS.append((marker.args[0], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for text, passed in _ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {text}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# scenes are rebuilt per test: several tests pressurize or pull on the
# model and the builders are cheap compared to any solve
@pytest.fixture
def bar_scene():
    from tactwin.scene import build_bar_scene

    return build_bar_scene()


@pytest.fixture
def pad_scene():
    from tactwin.scene import build_pad_scene

    return build_pad_scene()


@pytest.fixture
def fruit_scene():
    from tactwin.scene import build_fruit_scene

    return build_fruit_scene()
