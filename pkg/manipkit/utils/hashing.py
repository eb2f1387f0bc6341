import hashlib, json

import numpy as np


def payload_hash(payload: dict) -> str:
    s = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(s.encode()).hexdigest()


def pixel_set_hash(flat_indices: np.ndarray) -> str:
    data = np.ascontiguousarray(flat_indices, dtype="<i8").tobytes()
    return hashlib.sha256(data).hexdigest()


def derive_seed(*parts) -> int:
    """64-bit seed from an ordered tuple of json-able parts"""
    return int(payload_hash({"parts": list(parts)})[:16], 16)
