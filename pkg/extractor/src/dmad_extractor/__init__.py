"""Embedding export for the dmadkit detection pipeline.

Runs face images through six convolutional networks and writes the
resulting vectors as EMB1 files together with a JSON fragment recording
the preprocessing, so any downstream consumer of the format can use them.
"""

from .emb1 import FORMAT_VERSION, MAGIC, embedding_filename, write_embedding
from .errors import ExtractorError, ImageReadError, WeightsUnavailableError
from .extract import ExtractionResult, ExtractorConfig, extract
from .networks import NETWORKS, SPECS, NetworkSpec, build_network

__all__ = [
    "ExtractionResult",
    "ExtractorConfig",
    "ExtractorError",
    "FORMAT_VERSION",
    "ImageReadError",
    "MAGIC",
    "NETWORKS",
    "NetworkSpec",
    "SPECS",
    "WeightsUnavailableError",
    "build_network",
    "embedding_filename",
    "extract",
    "write_embedding",
]
