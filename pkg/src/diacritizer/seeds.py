"""Named sub-seed derivation so one run seed drives every RNG independently."""

import hashlib


def sub_seed(seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
