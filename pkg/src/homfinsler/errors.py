"""Exception hierarchy shared by every module."""


class FinslerError(Exception):
    """Base class for toolkit errors."""


class InputError(FinslerError, ValueError):
    """Malformed or inconsistent input data (shapes, indices, documents)."""


class StructureError(InputError):
    """Structure constants or reductive split violate a required identity."""


class DomainError(FinslerError, ValueError):
    """A point lies outside the domain where a metric quantity is defined."""


class SingularityError(DomainError):
    """A denominator is too close to zero near the admissible-cone boundary."""
