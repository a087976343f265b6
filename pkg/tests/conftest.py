import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "package", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("package")


@pytest.fixture
def paper_pair_specs():
    """The two-photon input of record: |A> at (-1, 0) and |D> at (1, 0)."""
    from qwalk2d import polarization_spec

    return polarization_spec("A", (-1, 0)), polarization_spec("D", (1, 0))
