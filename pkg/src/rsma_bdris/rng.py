"""Counter-based random streams keyed by (seed, trial index, purpose)."""
from __future__ import annotations

import zlib

import numpy as np

LABELS = ("channels", "bs_error", "attacker_error", "train_reflection", "random_attack")


def label_key(label: str) -> int:
    # crc32 is stable across processes, unlike the builtin hash()
    return zlib.crc32(label.encode("utf-8"))


def stream(seed: int, trial_index: int, label: str) -> np.random.Generator:
    """Independent Philox generator for one purpose within one trial.

    Streams with different ``(trial_index, label)`` pairs are statistically
    independent, and each is reproducible on its own regardless of how
    many draws other streams have made.
    """
    if seed < 0 or trial_index < 0:
        raise ValueError("seed and trial index must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial_index), label_key(label)))
    return np.random.Generator(np.random.Philox(ss))
