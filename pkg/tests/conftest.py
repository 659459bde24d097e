import logging

import pytest

from erasesim.graph import _cached_code


@pytest.fixture(autouse=True)
def _quiet_graph_warnings(caplog):
    # the d=3 graph legitimately warns about one ambiguous edge; keep the
    # test output readable without hiding other levels
    logging.getLogger("erasesim.graph").setLevel(logging.ERROR)
    yield
    logging.getLogger("erasesim.graph").setLevel(logging.NOTSET)


@pytest.fixture(scope="session")
def code3():
    return _cached_code(3)


@pytest.fixture(scope="session")
def code5():
    return _cached_code(5)
