import numpy as np
import pytest

ACCEPTANCE = {
    1: "minimal-frequency tables reproduced",
    2: "dispersion periodic in the mass",
    3: "conjugate branches",
    4: "norm drift over 1e4 steps",
    5: "gauge invariance and negative control",
    6: "plane-wave oracle",
    7: "Bloch oscillations",
    8: "massless cone isotropy",
    9: "deterministic artifacts",
}

_results: dict[int, list[bool]] = {}


def pytest_configure(config):
    for n in ACCEPTANCE:
        config.addinivalue_line("markers", f"criterion_{n}: check for acceptance criterion {n}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    n = _criterion_of(report)
    if n is not None:
        _results.setdefault(n, []).append(report.outcome == "passed")


def _criterion_of(report):
    for key in report.keywords:
        if key.startswith("criterion_"):
            return int(key.split("_")[1])
    return None


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        if n not in _results:
            continue
        ok = all(_results[n])
        passed = sum(_results[n])
        terminalreporter.write_line(
            f"criterion {n}: {'PASS' if ok else 'FAIL'}  {ACCEPTANCE[n]} ({passed}/{len(_results[n])} checks)")
