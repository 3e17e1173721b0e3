"""Exception types shared across the package."""


class GlpError(Exception):
    """Base class for all package errors."""


class ParameterError(GlpError, ValueError):
    """An argument is outside its documented domain."""


class CapacityError(GlpError):
    """A run would exceed the 32-bit vertex-id / step budget."""


class UnknownVertexError(GlpError, KeyError):
    """A vertex id that does not exist in the graph was requested."""


class ConfigError(GlpError, ValueError):
    """Invalid or contradictory configuration (CLI, config file, ensemble)."""


class PreconditionError(GlpError):
    """A statistical procedure was invoked outside its validity regime."""


class StatisticsError(GlpError):
    """Not enough data to produce the requested estimate."""


class FitError(GlpError):
    """A fit is degenerate or has no interior optimum."""


class ParseError(GlpError, ValueError):
    """Malformed input file (edge list, report, config)."""


class BatchError(GlpError):
    """An ensemble produced no usable replicas."""
