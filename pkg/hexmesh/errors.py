class HexMeshError(Exception):
    """Base class for every error raised by the hexmesh package."""
    exit_code = 2


class InvalidFacetError(HexMeshError):
    pass


class InvalidHexError(HexMeshError):
    pass


class InvalidComplexError(HexMeshError):
    pass


class InputError(HexMeshError):
    """Malformed boundary, mesh or file."""


class CapacityError(HexMeshError):
    """Limits exceed what the bit-set layout was sized for."""


class BudgetExceeded(HexMeshError):
    exit_code = 3


class NoCavityFound(HexMeshError):
    """Cavity selection gave up after its retry cap."""


class WorkerFailure(HexMeshError):
    """A parallel worker died; no partial counts are reported."""
    exit_code = 1
