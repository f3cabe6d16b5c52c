import numpy as np
import pytest

from rieszlab import Segment, set_from_dict
from rieszlab.presets import preset_dict


@pytest.fixture(scope="session")
def four_map_fractal():
    return set_from_dict(preset_dict("example-fractal"))


@pytest.fixture(scope="session")
def offset_segment():
    return set_from_dict(preset_dict("example-segment"))


@pytest.fixture(scope="session")
def example_union():
    return set_from_dict(preset_dict("example-union"))


@pytest.fixture(scope="session")
def unit_segment():
    return Segment(a=np.array([0.0]), b=np.array([1.0]))
