import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from xlalign.normalize import preprocess  # noqa: E402

from oracles import random_orthogonal  # noqa: E402


def make_rotated_pair(n=1000, d=20, seed=0, noise=0.0):
    """Source matrix plus a rotated, vocabulary-permuted copy.

    Returns (x, z, gold) where gold[i] is the row of z translating word i.
    """
    rng = np.random.default_rng(seed)
    x = preprocess(rng.standard_normal((n, d)))
    rot = random_orthogonal(d, rng)
    perm = rng.permutation(n)
    z = (x @ rot)[perm]
    if noise:
        z = z + rng.normal(0.0, noise, size=z.shape)
        z = z / np.linalg.norm(z, axis=1, keepdims=True)
    gold = np.empty(n, dtype=int)
    gold[perm] = np.arange(n)
    return x, z, gold


@pytest.fixture
def rotated_pair():
    return make_rotated_pair()
