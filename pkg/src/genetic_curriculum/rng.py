"""Named random substreams derived from a single master seed."""

from __future__ import annotations

import hashlib
import random


def derive_seed(master_seed: int, *labels: object) -> int:
    """64-bit seed for the substream identified by ``labels``."""
    key = ":".join([str(int(master_seed))] + [str(label) for label in labels])
    digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def substream(master_seed: int, *labels: object) -> random.Random:
    return random.Random(derive_seed(master_seed, *labels))
