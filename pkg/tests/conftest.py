import numpy as np
import pytest

from afspectral import algebra as al
from afspectral import triple as tr


@pytest.fixture(scope="session")
def uhf1():
    f = al.uhf(2, 1)
    return tr.build_triple(f, al.TraceState(), tr.dirac_explicit([1.0]))


@pytest.fixture(scope="session")
def uhf3():
    f = al.uhf(2, 3)
    return tr.build_triple(f, al.TraceState(), tr.dirac_explicit([1.0, 2.0, 4.0]))


@pytest.fixture(scope="session")
def uhf4():
    f = al.uhf(2, 4)
    return tr.build_triple(f, al.TraceState(), tr.dirac_explicit([1.0, 2.0, 4.0, 8.0]))


@pytest.fixture(scope="session")
def cantor3():
    f = al.cantor(3)
    return tr.build_triple(f, al.UniformState(), tr.dirac_explicit([1.0, 2.0, 4.0]))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_element(filtration, level, rng, selfadjoint=False):
    dim = filtration.dim(level)
    c = rng.normal(size=dim)
    if not selfadjoint:
        c = c + 1j * rng.normal(size=dim)
    return al.AlgebraElement(filtration, level, c)
