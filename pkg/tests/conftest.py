import pytest

from fpcodes import codes, kernels

BACKENDS = ["python"] + (["compiled"] if kernels.compiled_available() else [])

_acceptance: dict[int, tuple[str, str]] = {}


@pytest.fixture(params=BACKENDS)
def backend(request):
    old = kernels.use_backend(request.param)
    codes.clear_plan_cache()
    yield request.param
    kernels.use_backend(old)
    codes.clear_plan_cache()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")
    config.addinivalue_line("markers", "slow: long-running test")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    n, title = mark.args
    passed = call.excinfo is None
    prev = _acceptance.get(n)
    # a criterion split over several tests passes only if all of them pass
    if prev is None or prev[0] == "PASS":
        _acceptance[n] = ("PASS" if passed else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        status, title = _acceptance[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")
