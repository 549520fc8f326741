from __future__ import annotations

import numpy as np
import pytest

from holonomy_lab.metrics import MetricAnsatz, custom_profile


def random_profile(rng: np.random.Generator, n: int, alpha: float):
    """u = 1 + c1 r⁻² + c2 r⁻⁴ + c3 r⁻⁶: generically not a solution."""
    c1, c2, c3 = rng.uniform(-0.5, 0.5, size=3)

    def fn(r):
        return 1 + c1 * r**-2 + c2 * r**-4 + c3 * r**-6

    label = f"poly({c1:.3f},{c2:.3f},{c3:.3f})"
    return custom_profile(n, alpha, fn, label)


def random_cases(count: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 4))
        alpha = float(rng.uniform(0, 0.95))
        r = float(rng.uniform(1.3, 4.0))
        out.append((n, alpha, r, MetricAnsatz(random_profile(rng, n, alpha))))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
