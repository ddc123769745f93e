import hypothesis
import numpy as np
import pytest

from src.app import configure_logging
from src.models.config import QuadratureSpec, SpectralSettings, StabilitySettings
from src.services.geometry_service import model_ball_from_profile
from src.services.profile_service import escobar_threshold, solve_profile

np.seterr(all="warn")

hypothesis.settings.register_profile("lab", max_examples=25, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("lab")

configure_logging("WARNING")


@pytest.fixture(scope="session")
def quad():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def spectral_settings():
    return SpectralSettings(grid_nodes=600, l_max=4)


@pytest.fixture(scope="session")
def stability_settings():
    return StabilitySettings()


@pytest.fixture(scope="session")
def threshold3(quad):
    return escobar_threshold(3, quad)


@pytest.fixture(scope="session")
def spherical_profile(quad, threshold3):
    return solve_profile(3, 0.5 * threshold3, quad)


@pytest.fixture(scope="session")
def hyperbolic_profile(quad, threshold3):
    return solve_profile(3, 2.0 * threshold3, quad)


@pytest.fixture(scope="session")
def spherical_ball(spherical_profile):
    return model_ball_from_profile(spherical_profile)


@pytest.fixture(scope="session")
def hyperbolic_ball(hyperbolic_profile):
    return model_ball_from_profile(hyperbolic_profile)


@pytest.fixture(scope="session", params=["spherical", "hyperbolic"])
def profile_and_ball(request, spherical_profile, spherical_ball, hyperbolic_profile, hyperbolic_ball):
    if request.param == "spherical":
        return spherical_profile, spherical_ball
    return hyperbolic_profile, hyperbolic_ball
