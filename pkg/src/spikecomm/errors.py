"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid argument or configuration value."""


class ParseError(ValueError):
    """Malformed input file content. Messages carry the offending line number."""


class NumericFault(RuntimeError):
    """Simulation produced a non-finite membrane potential."""
