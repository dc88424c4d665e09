import pytest

from artifact import kernels
from artifact.config import set_precision
from artifact.trajectory import builtin_curve, solve_trajectory

_NAMES = ("horner_many", "horner_abs_many", "arg_increments", "poly_eval_many")


@pytest.fixture(autouse=True)
def _precision():
    set_precision(256)
    yield
    set_precision(256)


@pytest.fixture(scope="session")
def expcurve():
    return solve_trajectory(builtin_curve("expcurve(1)"))


@pytest.fixture(scope="session")
def logcurve():
    return solve_trajectory(builtin_curve("logcurve"))


@pytest.fixture(scope="session")
def logcurve5():
    return solve_trajectory(builtin_curve("logcurve(5)"))


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request, monkeypatch):
    """Route the module-level kernels through one backend."""
    mod = kernels.backends()[request.param]
    for name in _NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        ok, detail = results[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
