import pytest

from probact.cli import bundled_domain_path
from probact.domain import load_domain
from probact.worldmodel import Fluent, Vocabulary


@pytest.fixture(scope="session")
def tomato():
    return load_domain(bundled_domain_path())


@pytest.fixture(scope="session")
def tomato_net(tomato):
    return tomato.network()


@pytest.fixture
def small_vocab():
    return Vocabulary([Fluent.boolean("p"), Fluent.int_range("x", 0, 3)])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=str):
            terminalreporter.write_line(RESULTS[key])
