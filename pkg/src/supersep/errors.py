"""Exception hierarchy.

Precondition-style failures derive from :class:`PreconditionError`; the CLI maps
those to exit code 2 and everything derived from :class:`InputError` to exit
code 1.
"""


class SupersepError(Exception):
    pass


class PreconditionError(SupersepError, ValueError):
    """Input is well formed but violates an operation's contract."""


class InputError(SupersepError):
    """Input could not be read or parsed."""


class NonNormalized(PreconditionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class ZeroVector(PreconditionError):
    pass


class BadRank(PreconditionError):
    pass


class PreconditionViolated(PreconditionError):
    pass


class TooManyProducts(PreconditionError):
    pass


class NoSolution(PreconditionError):
    pass


class BadParams(PreconditionError):
    pass


class NotOrthonormal(PreconditionError):
    pass


class BadCandidate(PreconditionError):
    pass


class CertificateUnavailable(PreconditionError):
    pass


class NoWitness(PreconditionError):
    pass


class CompletionFailed(PreconditionError):
    pass


class BadWeight(PreconditionError):
    pass


class UnsupportedShape(PreconditionError):
    pass


class DomainError(PreconditionError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, offset=None):
        self.line = line
        self.offset = offset
        if line is not None:
            message = f"{message} (line {line}, offset {offset})"
        super().__init__(message)


class UnknownCommand(InputError):
    pass
