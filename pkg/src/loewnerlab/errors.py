"""Exception hierarchy shared across the toolkit.

The CLI maps these onto its exit codes: InputError -> 2, DomainError
(including SelfIntersectionError) -> 3, ToleranceError -> 4.
"""


class LoewnerError(Exception):
    pass


class InputError(LoewnerError, ValueError):
    """Malformed or inconsistent caller input (bad grids, files, configs)."""


class DomainError(LoewnerError, RuntimeError):
    """Input is well-formed but outside the operation's domain."""


class SelfIntersectionError(DomainError):
    """The zipper detected a curve touching itself or the real line."""


class ToleranceError(LoewnerError, RuntimeError):
    """An internal accuracy target could not be met."""
