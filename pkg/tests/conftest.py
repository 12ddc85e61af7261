import numpy as np
import pytest

from depbound.core import ObservedData


@pytest.fixture
def four():
    """X = (0, 0, 1, 1), every degree 1, nothing observed."""
    return ObservedData([0.0, 0.0, 1.0, 1.0], [1, 1, 1, 1])


def random_data(rng, n, forced_rate=0.15, dyadic=False):
    x = rng.integers(-8, 9, size=n) / 8 if dyadic else rng.uniform(-1, 1, size=n)
    caps = rng.integers(0, n, size=n)
    deg = np.zeros(n, dtype=int)
    forced = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < forced_rate and deg[i] < caps[i] and deg[j] < caps[j]:
                forced.append((i, j))
                deg[i] += 1
                deg[j] += 1
    return ObservedData(x, caps, tuple(forced))
