import numpy as np
import pytest

from listved.errors import EmptyRegion
from listved.geometry import DiffVector, gram_of, ved


def random_problems(seed, count, max_L=4, max_dim=4, amp=3.0, min_norm=0.3):
    """Feasible random problems from the uniform [-amp, amp] box."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        L = int(rng.integers(1, max_L + 1))
        m = int(rng.integers(1, max_dim + 1))
        D = rng.uniform(-amp, amp, (L, m))
        if np.any(np.linalg.norm(D, axis=1) < min_norm):
            continue
        problem = gram_of([DiffVector.from_dense(r) for r in D])
        try:
            ved(problem, "iterative")
        except EmptyRegion:
            continue
        out.append(problem)
    return out


@pytest.fixture(scope="session")
def small_problems():
    return random_problems(2024, 200)
