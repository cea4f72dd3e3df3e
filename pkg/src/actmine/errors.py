"""Shared exception types."""


class ActmineError(Exception):
    """Base class for library-specific failures."""


class SchemaError(ActmineError):
    """An input file does not match its declared schema."""


class ConfigError(ActmineError):
    """A run configuration violates an invariant."""
