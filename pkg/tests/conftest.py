import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

from lattice_wh import LatticeFrequency, WaveguideGeometry  # noqa: E402


@pytest.fixture(scope="session")
def geom_10_10():
    return WaveguideGeometry.symmetric_normal_form(10, 10)


@pytest.fixture(scope="session")
def freq_15():
    return LatticeFrequency(1.5)


@pytest.fixture(scope="session")
def geom_asym():
    return WaveguideGeometry(n1=0, n2=9, N1=15, N2=13)
