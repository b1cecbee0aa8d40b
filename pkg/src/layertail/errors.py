"""Exception hierarchy for layertail.

Everything raised on purpose derives from :class:`LayertailError`, so callers
can catch one base class at the CLI boundary.  Subclasses that signal bad
arguments also derive from ``ValueError`` to stay friendly to generic code.
"""


class LayertailError(Exception):
    """Base class for all layertail errors."""


class ParameterError(LayertailError, ValueError):
    """A parameter is outside its documented domain."""


class ShapeError(LayertailError, ValueError):
    """Array arguments have incompatible shapes or lengths."""


class DegenerateLayerError(LayertailError):
    """A layer's total weight is zero, so its graph law is undefined."""


class UnsupportedBackendError(LayertailError):
    """The requested backend cannot realize the requested graph law."""


class UnsupportedScenarioError(LayertailError):
    """A truth computation was asked for outside its validity domain."""


class ConvergenceError(LayertailError):
    """A Monte Carlo routine failed its internal agreement diagnostic."""


class EdgeListParseError(LayertailError):
    """An edge-list file contained no usable edges."""


class DegenerateSeriesError(LayertailError):
    """Two observation periods share no nodes."""


class AlignmentError(LayertailError):
    """Series to be correlated cannot be aligned."""


class UndefinedCorrelationError(LayertailError):
    """Correlation of a zero-variance series was requested."""
