import pytest

from revchor.syntax import load


@pytest.fixture(scope="session")
def units():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load(name)
        return cache[name]
    return get


@pytest.fixture
def m0(units):
    return lambda name: units(name).initial_config()
