"""Exception taxonomy shared by every module in the package.

The hierarchy mirrors how failures are reported at the command line:
usage problems exit 1, data and format problems exit 2, numerical
degeneracies exit 3.
"""

from __future__ import annotations


class DmadError(Exception):
    """Base class for all toolkit errors."""


class FormatError(DmadError):
    """A serialized artifact (embedding stream, manifest, model file) is
    malformed: bad magic, truncation, unknown version, unparseable JSON."""


class ValidationError(DmadError):
    """A structurally well-formed artifact violates an invariant.

    When raised from manifest validation, ``diagnostics`` carries the full
    list of findings; the message joins them for display.
    """

    def __init__(self, message: str, diagnostics: list | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class DataError(DmadError):
    """The data cannot support the requested computation: missing samples,
    empty pair sets, single-class training sets, mismatched dimensions."""


class NumericError(DmadError):
    """A numeric degeneracy: zero-norm vectors where a direction is needed,
    antipodal interpolation endpoints, zero-variance correlation inputs."""
