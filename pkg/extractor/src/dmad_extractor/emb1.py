"""Writer for the EMB1 embedding file format.

This is the interchange format the detection pipeline consumes. One file
holds one vector, little-endian:

    offset 0  4 bytes  magic "EMB1"
    offset 4  1 byte   format version, 0x01
    offset 5  4 bytes  dimension, uint32
    offset 9  4n bytes float32 values

Implemented here independently so the extractor talks to the consumer
through files alone.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ExtractorError

MAGIC = b"EMB1"
FORMAT_VERSION = 1


def embedding_filename(sample_id: str, network: str) -> str:
    return f"{sample_id}.{network}.emb"


def write_embedding(path: Path, values: np.ndarray) -> None:
    """Serialize one float32 vector. Rejects empty or non-finite data."""
    vec = np.ascontiguousarray(values, dtype="<f4")
    if vec.ndim != 1 or vec.size == 0:
        raise ExtractorError(f"embedding for {path.name} must be a non-empty vector")
    if not np.isfinite(vec).all():
        raise ExtractorError(f"non-finite value in embedding for {path.name}")
    header = MAGIC + bytes([FORMAT_VERSION]) + struct.pack("<I", vec.size)
    path.write_bytes(header + vec.tobytes())
