"""Exception taxonomy for the engine.

Each class maps to one failure category used across modules; CLI exit codes
are derived from these in cli.py.
"""


class GridRealmError(Exception):
    """Base class for all engine errors."""


class ConfigurationError(GridRealmError):
    """Invalid configuration: bad schema, bad config key, impossible setup."""


class LogicError(GridRealmError):
    """Internal contract violation: double free, tick mismatch, stale id."""


class QueryError(GridRealmError):
    """Malformed datastore query: unknown column, filter, or entity id."""


class ParameterError(GridRealmError):
    """Invalid predicate or task parameter."""


class TaskError(GridRealmError):
    """A task evaluator misbehaved (non-finite value)."""


class LifecycleError(GridRealmError):
    """Operation on an environment in the wrong lifecycle state."""


class FormatError(GridRealmError):
    """Corrupt or truncated serialized artifact (replay, map, obs dump)."""
