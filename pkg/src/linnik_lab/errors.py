"""Exception types shared across the library.

The CLI maps DomainError/PreconditionError to exit code 2 and
ResourceError to exit code 3.
"""


class LinnikLabError(Exception):
    pass


class DomainError(LinnikLabError, ValueError):
    """Input outside the mathematical domain of an operation."""


class PreconditionError(DomainError):
    """A stated hypothesis of a lemma/operation fails for the given inputs."""


class ResourceError(LinnikLabError, RuntimeError):
    """An enumeration exceeded its budget (memory or tuple visits)."""
