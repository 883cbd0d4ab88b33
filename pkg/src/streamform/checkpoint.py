"""Self-describing checkpoint container with bit-exact round-trips.

Layout: one JSON header line (format tag, metadata, array directory with
shapes/dtypes/offsets) followed by the concatenated row-major float64
buffers. No timestamps or other run-varying bytes, so identical runs
produce identical files.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

FORMAT_TAG = "streamform-checkpoint"
VERSION = 1


def save_checkpoint(path: str | Path, arrays: dict[str, np.ndarray], meta: dict) -> None:
    path = Path(path)
    entries = []
    blobs = []
    offset = 0
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype=np.float64)
        blob = arr.tobytes()
        entries.append(
            {
                "name": name,
                "shape": list(arr.shape),
                "dtype": "float64",
                "offset": offset,
                "nbytes": len(blob),
            }
        )
        blobs.append(blob)
        offset += len(blob)
    header = {
        "format": FORMAT_TAG,
        "version": VERSION,
        "meta": meta,
        "arrays": entries,
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8") + b"\n" + b"".join(blobs)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    raw = Path(path).read_bytes()
    newline = raw.index(b"\n")
    header = json.loads(raw[:newline].decode("utf-8"))
    if header.get("format") != FORMAT_TAG:
        raise ValueError(f"{path} is not a {FORMAT_TAG} file")
    body = raw[newline + 1 :]
    arrays: dict[str, np.ndarray] = {}
    for entry in header["arrays"]:
        start, n = entry["offset"], entry["nbytes"]
        arr = np.frombuffer(body[start : start + n], dtype=entry["dtype"]).copy()
        arrays[entry["name"]] = arr.reshape(entry["shape"])
    return arrays, header["meta"]
