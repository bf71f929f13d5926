class ToolkitError(Exception):
    """Base error carrying the process exit code for the CLI."""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ConfigError(ToolkitError):
    exit_code = 2


class NumericError(ToolkitError):
    exit_code = 3


class GridExhaustedError(NumericError):
    pass


class DegenerateSeparationError(NumericError):
    pass


class EigenSolverError(NumericError):
    pass


class NotAnEigenvalueError(NumericError):
    pass


class InconsistentVerdictError(NumericError):
    pass


class AcceptanceError(NumericError):
    pass
