import pytest

from mollifem.kernel import _cache


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-size convergence studies")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size convergence studies (minutes)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_convolution_cache():
    _cache.clear()
    yield
