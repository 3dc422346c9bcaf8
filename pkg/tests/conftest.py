import os

import pytest
from gmpy2 import mpq
from hypothesis import HealthCheck, settings, strategies as st

from dulac import corpus
from dulac.field import LogPoly

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

rationals = st.builds(mpq, st.integers(-20, 20), st.integers(1, 9))


def logpolys(max_degree=4):
    return st.lists(rationals, max_size=max_degree + 1).map(LogPoly)


def nonzero_logpolys(max_degree=4):
    return logpolys(max_degree).filter(bool)


@pytest.fixture(scope="session")
def problems():
    return {name: corpus.load(name) for name in corpus.NAMES}


@pytest.fixture(scope="session")
def abel0():
    return corpus.load("abel_C0")


@pytest.fixture(scope="session")
def painleve():
    return corpus.load("painleve6")
