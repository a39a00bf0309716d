"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the CLI surfaces
verbatim. ``CapExceeded`` subclasses map to exit status 3.
"""


class ReprepError(Exception):
    code = "error"


class CapExceeded(ReprepError):
    code = "cap-exceeded"


class SearchSpaceTooLarge(CapExceeded):
    code = "search-space-too-large"


class CircuitTooLarge(CapExceeded):
    code = "circuit-too-large"


class GadgetTooLarge(CapExceeded):
    code = "gadget-too-large"


class CloudTooLarge(CapExceeded):
    code = "cloud-too-large"


class WalkSpaceTooLarge(CapExceeded):
    code = "walk-space-too-large"


class InvalidGame(ReprepError, ValueError):
    code = "invalid-game"


class EmptyGame(ReprepError, ValueError):
    code = "empty-game"


class EmptyRectangle(ReprepError, ValueError):
    code = "empty-rectangle"


class DimensionMismatch(ReprepError, ValueError):
    code = "dimension-mismatch"


class IndexOutOfRange(ReprepError, IndexError):
    code = "index-out-of-range"


class InvalidSpec(ReprepError, ValueError):
    code = "invalid-spec"


class UndefinedVertex(ReprepError, KeyError):
    code = "undefined-vertex"

    def __str__(self):
        return Exception.__str__(self)


class NotRegular(ReprepError, ValueError):
    code = "not-regular"


class EpsOutOfRange(ReprepError, ValueError):
    code = "eps-out-of-range"


class InvalidDensity(ReprepError, ValueError):
    code = "invalid-density"


class CoordinateEmbeddingViolated(ReprepError, ValueError):
    code = "coordinate-embedding-violated"

    def __init__(self, message, side=None, vertex=None):
        super().__init__(message)
        self.side = side
        self.vertex = vertex


class ImageNotInH(ReprepError, ValueError):
    code = "image-not-in-h"


class InvalidEmbedding(ReprepError, ValueError):
    code = "invalid-embedding"


class NotRobustEnough(ReprepError):
    code = "not-robust-enough"

    def __init__(self, message, fraction=None):
        super().__init__(message)
        self.fraction = fraction


class NoGoodBucket(ReprepError):
    code = "no-good-bucket"

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table or []


class CodeMismatch(ReprepError, ValueError):
    code = "code-mismatch"


class NotComposedGraph(ReprepError, ValueError):
    code = "not-composed-graph"


class ConfigInvalid(ReprepError, ValueError):
    code = "config-invalid"
