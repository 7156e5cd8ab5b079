from fractions import Fraction

import pytest
from hypothesis import settings

from hexmeasure import fixtures

settings.register_profile("repo", max_examples=40, deadline=None)
settings.load_profile("repo")


@pytest.fixture
def T3():
    return fixtures.t3()


@pytest.fixture
def C5():
    return fixtures.c5()


@pytest.fixture
def HF():
    return fixtures.hf_pair()


def F(x):
    return Fraction(x)
