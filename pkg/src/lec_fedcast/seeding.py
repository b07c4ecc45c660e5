"""Deterministic seed derivation.

Every random stream in a run is derived from one master seed plus a tuple of
purpose labels ("dataset", user id, ...), so the full run can be reproduced
from the manifest and parallel execution cannot change any result.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, *labels: int | str) -> int:
    """Derive a child seed from the master seed and a label path.

    Stable across platforms and Python versions (sha256, not hash()).
    """
    key = repr(int(master)) + "/" + "/".join(repr(lab) for lab in labels)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(master: int, *labels: int | str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *labels))
