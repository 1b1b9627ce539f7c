"""Shared synthetic data for tests."""

import numpy as np

from rffp.features import LabeledDataset


def separable_set(per_class=10, seed=0, noise=0.1):
    """Nine classes, each lighting a different band of three 30-wide rows."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, noise, (9 * per_class, 900))
    y = np.repeat(np.arange(9), per_class)
    for i, c in enumerate(y):
        x[i, 90 * c:90 * (c + 1)] += 1 - noise
    return LabeledDataset(np.clip(x, 0, 1), y)


# criterion id -> (status, detail); printed by the terminal-summary hook in conftest
ACCEPTANCE = {}


def record(key, ok, detail):
    ACCEPTANCE[key] = ("PASS" if ok else "FAIL", detail)
    assert ok, f"criterion {key}: {detail}"
