"""Exception types raised across the toolkit.

Everything derives from :class:`IrcgError` so callers can catch broadly;
subclasses also derive from the closest builtin where that reads naturally
(``ValueError`` for bad inputs, ``RuntimeError`` for runtime failures).
"""


class IrcgError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(IrcgError, ValueError):
    """A point does not match the problem's layout."""


class NonFiniteValue(IrcgError, ValueError):
    """An objective, gradient, or input produced a NaN or infinity."""


class InvalidSchedule(IrcgError, ValueError):
    """A regularization sequence is not strictly decreasing and positive."""


class InvalidDescent(IrcgError, RuntimeError):
    """The linearized decrease is positive: the oracle direction is not a
    descent direction, which signals an LMO or gradient bug."""


class NonConvergence(IrcgError, RuntimeError):
    """An iterative routine hit its iteration cap before its tolerance."""


class ZeroMatrix(IrcgError, ValueError):
    """A spectral routine received an (effectively) zero matrix; callers
    decide the degenerate branch."""


class InfeasibleOracle(IrcgError, ValueError):
    """A sliced-oracle subproblem has an empty feasible set."""


class DegenerateOracle(IrcgError, RuntimeError):
    """The sliced oracle could not certify optimality and the selection is
    ambiguous (zero shifted cost matrix)."""


class MissingMetadata(IrcgError, ValueError):
    """A computation needs instance constants that were not supplied."""


class MissingProjection(IrcgError, ValueError):
    """A projection-based method was given a problem without a projection."""


class RadiusTooSmall(IrcgError, ValueError):
    """The requested feasible ball does not contain the target solution."""


class PreconditionViolated(IrcgError, ValueError):
    """An instance constructor's structural requirements do not hold."""


class ParseError(IrcgError, ValueError):
    """A data or trace file does not match its format."""


class DuplicateEntry(IrcgError, ValueError):
    """An observation file repeats a (row, column) pair."""


class ConfigError(IrcgError, ValueError):
    """A run configuration is malformed or contains unknown keys."""


class InsufficientData(IrcgError, ValueError):
    """Not enough usable rows in the requested window."""
