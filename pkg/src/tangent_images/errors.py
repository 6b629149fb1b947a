"""Exception hierarchy with stable machine-readable error codes.

Every error raised by this package carries a ``code`` string that is part of
the public contract: the CLI emits it in the JSON error payload on stderr,
and downstream bindings re-expose it unchanged.
"""


class TangentImageError(Exception):
    """Base class for all package errors."""

    code = "error"


class InvalidArgumentError(TangentImageError):
    """A precondition on an argument was violated."""

    code = "invalid-argument"


class ResourceLimitError(TangentImageError):
    """A guarded resource limit (e.g. subdivision level) was exceeded."""

    code = "resource-limit"


class AspectError(TangentImageError):
    """Input raster is not a 2:1 full-sphere panorama."""

    code = "format.aspect"


class BitDepthError(TangentImageError):
    """Raster bit depth is not supported for the requested semantics."""

    code = "format.bit-depth"


class UnreadableFileError(TangentImageError):
    """File missing or not decodable as a supported raster."""

    code = "io.read"


class MetaFormatError(TangentImageError):
    """Tangent-set directory metadata is inconsistent with its contents."""

    code = "format.meta"


class MissingFaceError(TangentImageError):
    """A face image named by meta.json is absent."""

    code = "format.missing-face"


class EncodeRangeError(TangentImageError):
    """Sample values cannot be encoded in the target integer format."""

    code = "range.encode"


class OutOfHemisphereError(TangentImageError):
    """Point at or beyond 90 degrees from the projection center."""

    code = "out-of-hemisphere"


class CoverageViolationError(TangentImageError):
    """Internal self-check: an output direction fell outside its owning
    face's tangent grid. Impossible while the coverage guarantee holds."""

    code = "coverage.violation"


class SourceTooNarrowError(TangentImageError):
    """Source camera field of view is smaller than the target's."""

    code = "source-too-narrow"


class UndefinedOverlapError(TangentImageError):
    """Overlap is undefined because a depth map has no valid samples."""

    code = "undefined-overlap"


class InvalidEntryError(TangentImageError):
    """A match-statistics entry has a zero denominator or negative count."""

    code = "invalid-entry"


#: Exit codes used by the CLI, keyed by the leading segment of the error code.
EXIT_CODES = {
    "invalid-argument": 2,
    "format": 3,
    "io": 4,
    "range": 5,
    "resource-limit": 6,
}


def exit_code_for(err: TangentImageError) -> int:
    head = err.code.split(".", 1)[0]
    return EXIT_CODES.get(head, 1)
