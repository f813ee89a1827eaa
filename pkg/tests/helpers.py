"""Instance generators shared by the test modules."""

import numpy as np


def random_instance(rng, n_max, m_max, dup_prob=0.4, n_min=0, m_min=0):
    """Sorted random instance; with probability ``dup_prob`` the coordinates
    come from a coarse integer grid so ties are frequent."""
    n = int(rng.integers(n_min, n_max + 1))
    m = int(rng.integers(m_min, m_max + 1))
    if rng.random() < dup_prob:
        span = int(rng.integers(1, 6))
        x = rng.integers(-span, span + 1, size=n).astype(float)
        y = rng.integers(-span, span + 1, size=m).astype(float)
    else:
        x = rng.normal(0.0, 2.0, size=n)
        y = rng.normal(rng.normal(), 2.0, size=m)
    return np.sort(x), np.sort(y)


def adversarial_instance(rng, n_max, m_max):
    """Few distinct values, many repeats, sometimes on both sides at once."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    vals = rng.normal(size=int(rng.integers(1, 4)))
    x = rng.choice(vals, size=n)
    y = rng.choice(np.concatenate([vals, vals + rng.normal(scale=0.5)]), size=m)
    return np.sort(x), np.sort(y)


def rel_close(a, b, rtol=1e-9):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))
