import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_adversarial(rng, T=50, K=3, d=2, B=None, null=True):
    """Random outcome sequence in [0, 1]; the last arm is null when `null`."""
    from bwk.core import BwkInstance

    m = rng.random((T, K, d + 1))
    if null:
        m[:, -1] = 0.0
    B = float(rng.uniform(1, T)) if B is None else B
    return BwkInstance(K, d, T, B, matrices=m, null_arm=K - 1 if null else None)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
