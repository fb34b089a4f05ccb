class DEC2DError(Exception):
    """Base class for all errors raised by DEC2D."""


class MeshParseError(DEC2DError, ValueError):
    """
    A mesh file line could not be parsed.

    @param message: [`str`] What went wrong
    @param line: [`int`] 1-based line number in the mesh file, if known
    """
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class MeshValidationError(DEC2DError, ValueError):
    pass


class GeometryError(DEC2DError, ValueError):
    pass


class SingularSystemError(DEC2DError, RuntimeError):
    pass


class NumericalBreakdownError(DEC2DError, RuntimeError):
    pass


class ScenarioError(DEC2DError, ValueError):
    pass
