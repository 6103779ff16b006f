"""Exception types shared across the package."""


class PolysegError(Exception):
    """Base class for package errors."""


class InputError(PolysegError, ValueError):
    """Bad user-supplied data or parameters (CLI exit code 2)."""


class ConfigError(PolysegError, ValueError):
    """Unsupported configuration, e.g. degree above the ceiling (exit code 2)."""


class InternalError(PolysegError, RuntimeError):
    """An internal invariant was violated (CLI exit code 3)."""
