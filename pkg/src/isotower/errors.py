"""Exception types shared across the package; the CLI maps them to exit codes."""


class ParameterError(ValueError):
    """Invalid parameters (exit code 2)."""


class CapExceeded(RuntimeError):
    """A configured size cap would be exceeded (exit code 3)."""


class TheoremCheckFailure(AssertionError):
    """A verified statement failed on a concrete instance (exit code 1)."""
