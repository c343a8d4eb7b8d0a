class InvalidParameterError(ValueError):
    """Raised when a parameter is outside its admissible range."""


class DimensionMismatchError(ValueError):
    """Raised when a state does not match the period/dimension of a problem."""


class ConfigError(ValueError):
    """Malformed problem configuration.

    ``field`` names the offending entry (e.g. ``weights[0][1]``) and ``line``
    the JSON line number when the document itself fails to parse.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ConvergenceError(RuntimeError):
    """A local search stopped without meeting its tolerance.

    The last iterate is kept on ``x`` so callers can report it.
    """

    def __init__(self, message, x=None, iterations=0, grad_inf=float("nan")):
        super().__init__(message)
        self.x = x
        self.iterations = iterations
        self.grad_inf = grad_inf
