import numpy as np
import pytest

from mixbgk.state import MixtureParams

# four-gas mixing mixture used across the suite
FOUR_MASSES = np.array([58.5, 18.0, 40.0, 36.5])
FOUR_LAMBDA = np.array([
    [5.0, 6.0, 2.0, 7.0],
    [6.0, 4.0, 5.0, 8.0],
    [2.0, 5.0, 4.0, 3.0],
    [7.0, 8.0, 3.0, 6.0],
])


@pytest.fixture
def four_gas():
    return MixtureParams(m=FOUR_MASSES.copy(), lam=FOUR_LAMBDA.copy())


def random_admissible(rng, L, size, masses=FOUR_MASSES, lam=FOUR_LAMBDA):
    """Random moment batches within the admissible box used by the paper-style
    positivity checks: n in [0.1, 10], |u| <= 5, T in [0.1, 10]."""
    params = MixtureParams(m=masses[:L].copy(), lam=lam[:L, :L].copy())
    n = rng.uniform(0.1, 10.0, (L, size))
    u = rng.uniform(-5.0, 5.0, (L, size))
    T = rng.uniform(0.1, 10.0, (L, size))
    return params, n, u, T
