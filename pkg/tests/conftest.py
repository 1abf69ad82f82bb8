import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=150,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def set_backend():
    from permutex.diagrams import SetBackend

    return SetBackend()


@pytest.fixture(scope="session")
def group_backend():
    from permutex import fixtures
    from permutex.diagrams import AlgebraBackend

    return AlgebraBackend.from_fixtures([fixtures.algebra(n) for n in ("z4", "v4", "s3")])
