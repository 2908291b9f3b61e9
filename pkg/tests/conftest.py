import os

import pytest
from hypothesis import HealthCheck, settings

from fraczener.cli import PRESETS
from fraczener.model_catalog import model_from_descriptor

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


@pytest.fixture(scope="session")
def case1():
    return model_from_descriptor(PRESETS["case-np"])


@pytest.fixture(scope="session")
def rp_printed():
    return model_from_descriptor(PRESETS["case-rp"])


@pytest.fixture(scope="session")
def rp_exact():
    return model_from_descriptor(PRESETS["case-rp-exact"])


@pytest.fixture(scope="session")
def ccp():
    return model_from_descriptor(PRESETS["case-ccp"])


@pytest.fixture(scope="session")
def idid():
    return model_from_descriptor(PRESETS["id-id"])
