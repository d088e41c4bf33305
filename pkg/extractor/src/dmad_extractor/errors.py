"""Error taxonomy for the extractor."""

from __future__ import annotations


class ExtractorError(Exception):
    """Base class for extraction failures."""


class WeightsUnavailableError(ExtractorError):
    """Pretrained weights could not be obtained.

    Raised when the weight download fails (offline environments) or when
    no pretrained source exists for a network. The message says which
    network and what the options are.
    """


class ImageReadError(ExtractorError):
    """An input file could not be decoded as an image."""
