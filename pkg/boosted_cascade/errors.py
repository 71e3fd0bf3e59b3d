class CascadeError(Exception):
    """Base class of all errors raised by boosted_cascade."""


class DimensionError(CascadeError, ValueError):
    pass


class LayoutError(CascadeError, ValueError):
    pass


class LabelError(CascadeError, ValueError):
    pass


class DataError(CascadeError, ValueError):
    pass


class ParameterError(CascadeError, ValueError):
    pass


class NumericError(CascadeError, ArithmeticError):
    pass


class DivergenceError(NumericError):
    """Training produced a non-finite loss."""

    def __init__(self, msg, level=None, step=None):
        super().__init__(msg)
        self.level = level
        self.step = step


class StateError(CascadeError, RuntimeError):
    pass


class SpecError(CascadeError, ValueError):
    pass


class ParseError(CascadeError, ValueError):
    """Parsing failed; `line` is the 1-based line number when known."""

    def __init__(self, msg, line=None, token=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line
        self.token = token


class ConfigError(CascadeError, ValueError):
    pass
