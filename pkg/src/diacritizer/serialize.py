"""Deterministic on-disk container for model files.

Layout: a magic line, a 16-digit header length, a JSON header (sorted
keys), then the raw little-endian C-order bytes of each array in header
order.  Byte-stable across runs for identical contents, which `npz`/zip
containers do not guarantee.
"""

from __future__ import annotations

import json
from typing import Dict, Tuple

import numpy as np

MAGIC = b"DIACRITIZER/1\n"


def save_container(path: str, kind: str, meta: dict, arrays: Dict[str, np.ndarray]) -> None:
    """Write metadata plus named arrays; arrays stored in sorted name order."""
    names = sorted(arrays)
    header = {
        "kind": kind,
        "version": 1,
        "meta": meta,
        "arrays": [
            {"name": n, "dtype": str(arrays[n].dtype), "shape": list(arrays[n].shape)}
            for n in names
        ],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(b"%016d" % len(blob))
        fh.write(blob)
        for n in names:
            arr = np.ascontiguousarray(arrays[n])
            fh.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


def load_container(path: str) -> Tuple[str, dict, Dict[str, np.ndarray]]:
    """Read (kind, meta, arrays) back from a container file."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a diacritizer model file")
        length = int(fh.read(16))
        header = json.loads(fh.read(length).decode("utf-8"))
        arrays = {}
        for spec in header["arrays"]:
            dtype = np.dtype(spec["dtype"]).newbyteorder("<")
            count = int(np.prod(spec["shape"])) if spec["shape"] else 1
            data = fh.read(count * dtype.itemsize)
            arrays[spec["name"]] = np.frombuffer(data, dtype=dtype).reshape(spec["shape"]).copy()
    return header["kind"], header["meta"], arrays
