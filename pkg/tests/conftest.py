import pytest

from saamg import backend_context


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request):
    """Run the test once per kernel backend."""
    with backend_context(request.param):
        yield request.param


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
