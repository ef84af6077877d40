"""Exception hierarchy. Every error carries a short ``code`` used by the CLI."""


class RoumieuError(Exception):
    code = "error"


class InvalidArgument(RoumieuError, ValueError):
    code = "invalid-argument"


class InvalidSequence(RoumieuError, ValueError):
    code = "invalid-sequence"


class DepthExceeded(InvalidArgument):
    code = "depth-exceeded"


class BlockNotFound(RoumieuError):
    code = "block-not-found"

    def __init__(self, n, depth):
        super().__init__(f"no block start for row {n} within depth {depth}")
        self.n = n
        self.depth = depth


class BoundaryAttained(RoumieuError):
    code = "boundary-attained"

    def __init__(self, n, depth):
        super().__init__(
            f"C_{n} is maximised at the last index p={depth}; "
            "the row does not look summable against the sequence")
        self.n = n
        self.depth = depth


class ExtendGrid(RoumieuError):
    code = "extend-grid"

    def __init__(self, message, y=None):
        super().__init__(message)
        self.y = y


class ExtendDepth(RoumieuError):
    code = "extend-depth"

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NoGap(RoumieuError):
    code = "no-gap"


class ConstructionFailed(RoumieuError):
    code = "construction-failed"


class ParseError(InvalidArgument):
    """Malformed input file; the message names the offending field."""

    code = "parse-error"

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
