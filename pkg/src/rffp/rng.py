"""Deterministic random streams.

Every stochastic step draws from a Philox counter-based generator keyed by a
``SeedSequence`` built from the run seed plus integer context keys (device id,
burst index, fold index, ...). Streams with different keys are independent and
none depends on evaluation order, so work can be split across processes.
"""

import numpy as np


def substream(seed, *keys):
    """Return a Philox generator for the context ``(seed, *keys)``."""
    entropy = [int(seed)] + [int(k) for k in keys]
    if any(v < 0 for v in entropy):
        # SeedSequence wants non-negative words; fold negatives into a distinct range
        entropy = [v if v >= 0 else (1 << 63) + (-v) for v in entropy]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed, *keys):
    """A 32-bit child seed, used where a plain integer seed must be passed on."""
    entropy = [int(seed)] + [int(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])
