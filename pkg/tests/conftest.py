import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from martpara.measure_space import Filtration, MeasureSpace

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def uniform4():
    return MeasureSpace.uniform(4)


@pytest.fixture
def tree4():
    return Filtration((((0, 1, 2, 3),), ((0, 1), (2, 3)), ((0,), (1,), (2,), (3,))))


@pytest.fixture
def f4():
    return np.array([1.0, -1.0, 2.0, -2.0])
