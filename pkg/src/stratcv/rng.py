"""Deterministic derivation of named random streams from one master seed.

Every stochastic component draws from its own generator, derived from the
master seed plus a tuple of labels naming the component. Derivation goes
through SHA-256, so streams are reproducible across processes and platforms
and do not depend on the order in which components run.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(master_seed, *labels):
    """Return a np.random.Generator unique to (master_seed, *labels).

    Labels may be strings or integers; they are hashed via their repr, so
    ("sim", 3) and ("sim", "3") give distinct streams.
    """
    entropy = [int(master_seed) & _MASK64]
    for label in labels:
        digest = hashlib.sha256(repr(label).encode("utf-8")).digest()
        entropy.append(int.from_bytes(digest[:8], "little"))
    return np.random.default_rng(np.random.SeedSequence(entropy))
