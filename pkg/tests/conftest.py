import pytest
from hypothesis import HealthCheck, settings

from ugamma.localfield import ExtensionContext
from ugamma.unitary import FormContext

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_criteria: dict[str, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def ext():
    return ExtensionContext.unramified(3)


@pytest.fixture(scope="session")
def ram():
    return ExtensionContext.ramified(3)


@pytest.fixture(scope="session", params=[(1, 0), (1, 1), (2, 0), (2, 1)], ids=lambda mk: f"m{mk[0]}k{mk[1]}")
def form(request, ext):
    m, k = request.param
    return FormContext(ext, m, k)


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for key, title in getattr(report, "user_properties", []):
        if key == "criterion":
            _criteria[title] = ("PASS" if report.passed else "FAIL", report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for title in sorted(_criteria, key=lambda t: int(t.split(".")[0])):
        status, _ = _criteria[title]
        terminalreporter.write_line(f"{status}  {title}")
