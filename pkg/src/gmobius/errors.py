"""Error taxonomy shared by every module.

Exit-code mapping used by the CLI: ParseError and AxiomViolation are input
errors (2), SizeLimit is a resource cap (3), MismatchBug means two internal
routes disagreed and the result cannot be trusted (4).
"""


class ParseError(ValueError):
    """Malformed input file or unknown named instance."""


class AxiomViolation(ValueError):
    """Input fails a matroid axiom; carries a witness when available."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotSimple(ValueError):
    """Operation requires a simple matroid (no loops, no parallel pairs)."""


class SizeLimit(RuntimeError):
    """Instance exceeds a documented size cap; partial data may be attached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class MismatchBug(AssertionError):
    """Two independent computations of the same quantity disagreed."""


class BadArgument(ValueError):
    """Argument outside the operation's documented domain."""
