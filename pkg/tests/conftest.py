import pytest

from mtra import fixtures


@pytest.fixture(scope="session")
def mixed_pair():
    return fixtures.mixed_pair()


@pytest.fixture(scope="session")
def dependent_pair():
    return fixtures.dependent_pair()


@pytest.fixture(scope="session")
def blank_vs_chain():
    return fixtures.blank_vs_chain()


@pytest.fixture(scope="session")
def three_chains():
    return fixtures.three_chains()


@pytest.fixture(scope="session")
def opposed_trio():
    return fixtures.opposed_trio()
