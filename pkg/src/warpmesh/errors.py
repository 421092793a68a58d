"""Exception hierarchy shared by the library and the CLI."""


class WarpMeshError(Exception):
    """Base class for all warpmesh errors."""


class ConfigError(WarpMeshError, ValueError):
    """Invalid size, coefficient, step count or similar user-supplied setting."""


class NumericalDomainError(WarpMeshError, ValueError):
    """Argument outside the domain where a map or relation is defined."""


class SchemeMismatchError(WarpMeshError, ValueError):
    """A state was handed to a stepper for a different scheme."""


class JunctionLookupError(WarpMeshError, LookupError):
    """Unknown junction id."""
