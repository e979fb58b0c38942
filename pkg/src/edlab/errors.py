"""Exception and warning types shared across the package."""


class EdLabError(Exception):
    """Base class for all package-specific errors."""


class GridMismatchError(EdLabError):
    """Fields defined on different grids were combined."""


class NonFiniteFieldError(EdLabError):
    """A field contains NaN or infinite entries."""


class OutsideDomainError(EdLabError):
    """A continuum position lies outside a non-periodic grid domain."""


class StabilityError(EdLabError):
    """Explicit time integration exceeded its stability envelope."""


class NodePathError(EdLabError):
    """Phase continuation hit a point with magnitude below the node floor."""


class OpenLoopError(EdLabError):
    """A closed loop was required but the path does not close."""


class CoarsePhaseError(EdLabError):
    """Loop phase increments too large for reliable winding extraction."""


class SolveError(EdLabError):
    """A linear solve failed or did not reach the required residual."""


class FloorRegularizationWarning(RuntimeWarning):
    """Density fell below the regularization floor and was clamped."""


class NormalizationWarning(RuntimeWarning):
    """A density that should integrate to one does not, within tolerance."""
