"""Counter-based random streams keyed by seed and context.

Philox streams are stable across platforms. Keying on the candidate pixel
set makes each draw independent of call order.
"""
import numpy as np

from manipkit.utils.hashing import payload_hash


def make_rng(seed: int, *context) -> np.random.Generator:
    digest = payload_hash({"seed": int(seed), "context": list(context)})
    key = int(digest[:32], 16)  # 128-bit Philox key
    return np.random.Generator(np.random.Philox(key=key))


def choose_index(seed: int, count: int, *context) -> int:
    if count <= 0:
        raise ValueError("choose_index needs at least one candidate")
    return int(make_rng(seed, *context).integers(0, count))
