class MaxvelError(Exception):
    """Base class for all package errors."""


class GridError(MaxvelError):
    pass


class RepresentationError(MaxvelError):
    pass


class SymbolError(MaxvelError):
    """Singular momentum symbol applied to a field with zero-mode mass."""


class DilationRangeError(MaxvelError):
    pass


class QuadratureError(MaxvelError):
    pass


class FilterDegreeError(MaxvelError):
    pass


class SolverError(MaxvelError):
    """Iterative eigen or linear solver failed to converge."""


class KrylovStepError(MaxvelError):
    pass


class ConfigError(MaxvelError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CheckpointError(MaxvelError):
    pass


class CallbackError(MaxvelError):
    pass


class PreconditionError(MaxvelError):
    pass
