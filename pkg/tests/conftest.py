import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from scenguard.dnn import load_network  # noqa: E402
from scenguard.engine import ControllerBinding  # noqa: E402
from models import DATA, add_cold_water, add_hot_water, stability  # noqa: E402

settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=50, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))

@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def running_net():
    return load_network((DATA / "running_example.net").read_text())


@pytest.fixture
def binding(running_net):
    return ControllerBinding(running_net, "x", ("y1", "y2"))


@pytest.fixture
def taps():
    return [add_hot_water(), add_cold_water(), stability()]
