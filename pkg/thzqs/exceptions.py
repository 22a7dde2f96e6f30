class ThzqsException(Exception):
    pass


class ActionException(ThzqsException):
    pass


class ConfigException(ThzqsException):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class FormatException(ThzqsException):
    def __init__(self, path, line, column, message):
        super().__init__(f"{path}:{line}: column '{column}': {message}")
        self.path = path
        self.line = line
        self.column = column


class OutOfRange(ThzqsException, ValueError):
    def __init__(self, band, frequency, valid=None):
        detail = f" (valid {valid[0]:.4g}..{valid[1]:.4g} Hz)" if valid else ""
        super().__init__(f"{band} band evaluated at {frequency:.6g} Hz{detail}")
        self.band = band
        self.frequency = frequency


class DomainError(ThzqsException, ValueError):
    pass


class NoRoot(ThzqsException):
    def __init__(self, message, interval):
        super().__init__(f"{message} in [{interval[0]:.6g}, {interval[1]:.6g}] Hz")
        self.interval = interval


class NonUnitary(ThzqsException):
    pass


class QuadratureError(ThzqsException):
    def __init__(self, achieved, tolerance):
        super().__init__(f"quadrature did not converge: relative change {achieved:.3g} > {tolerance:.3g}")
        self.achieved = achieved
        self.tolerance = tolerance


class NotConverged(ThzqsException):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class EnvelopeAtEdge(ThzqsException):
    pass


class NonUniformGrid(ThzqsException):
    pass


class TooShort(ThzqsException):
    pass


class BranchMismatch(ThzqsException):
    pass
