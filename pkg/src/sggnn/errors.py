"""Exception hierarchy.

Every error raised on purpose by the package derives from ``SgGnnError`` so the
CLI can map validation failures to exit code 1.
"""


class SgGnnError(Exception):
    """Base class for all validation errors raised by the package."""


class CapExceeded(SgGnnError):
    pass


class EmptyGraph(SgGnnError):
    pass


class EmptyClass(SgGnnError):
    pass


class SingleClass(SgGnnError):
    pass


class InvalidK(SgGnnError):
    pass


class InvalidQuantile(SgGnnError):
    pass


class ShapeMismatch(SgGnnError, ValueError):
    pass


class ConvergenceError(SgGnnError):
    pass


class EmptyTrainSet(SgGnnError):
    pass


class MissingClassInTrain(SgGnnError):
    pass


class NotRecoverable(SgGnnError):
    pass


class IndivisibleClasses(SgGnnError):
    pass


class ParseError(SgGnnError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class InconsistentNodeCount(SgGnnError):
    pass


class ConfigError(SgGnnError):
    pass
