"""Exception types shared across the simulator."""


class TactwinError(Exception):
    """Base class for all tactwin errors."""


# --- mesh / geometry ---

class ParseError(TactwinError):
    """Mesh or scene file is malformed."""


class DegenerateElement(TactwinError):
    """Tetrahedron has (near-)zero volume even after reorientation."""


class EmptyIntersection(TactwinError):
    """A cutting plane does not intersect the surface."""


class ParallelPlanes(TactwinError):
    """Cross-family grid planes are parallel; their intersection line is undefined."""


# --- fem ---

class InvertedElement(TactwinError):
    """Element deformation gradient has non-positive determinant."""


class SingularSystem(TactwinError):
    """Linear solve failed (singular or indefinite system)."""


class UnknownCavity(TactwinError):
    """Referenced cavity name does not exist in the scene."""


class NotConverged(TactwinError):
    """Equilibrium solve exhausted its iteration budget."""


# --- sensor / touch ---

class InsufficientFrames(TactwinError):
    """Baseline calibration needs at least two frames."""


class DimensionMismatch(TactwinError):
    """Activation map shape does not match the taxel grid."""


class ZeroActivation(TactwinError):
    """Weighted position undefined: all neighborhood values are zero."""


class MissingAnchor(TactwinError):
    """A nonzero weight falls on a taxel without a 3D anchor."""


# --- bench / service ---

class EmptyInput(TactwinError):
    """Statistics requested over an empty pair list."""


class UnknownFixture(TactwinError):
    """No fixture dataset with the requested name."""


class NoDetection(TactwinError):
    """A probe sample produced no touch detection."""


class SceneError(TactwinError):
    """Scene configuration is invalid or failed to initialize."""


class ValidationError(TactwinError):
    """A client command failed validation against the loaded scene."""
