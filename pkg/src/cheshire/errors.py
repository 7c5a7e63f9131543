"""Exception types raised across the package."""


class CheshireError(Exception):
    """Base class for every error this package raises deliberately."""


# --- layouts, states and operators ---------------------------------------


class DuplicateModeName(CheshireError):
    """Two modes in one layout (or tensor product) share a name."""


class LayoutMismatch(CheshireError):
    """Operands live on different mode layouts."""


class UnknownMode(CheshireError):
    """A mode name or basis label does not exist in the layout."""


class DimensionMismatch(CheshireError):
    """Array shape does not match the layout it claims to describe."""


class NotNormalized(CheshireError):
    """A state required to be unit norm is not."""


class NotHermitian(CheshireError):
    """An operator required to be Hermitian is not."""


class NotUnitary(CheshireError):
    """An operator required to be unitary is not."""


class BasisNotOrthonormal(CheshireError):
    """A sampling basis is not orthonormal or does not span the space."""


# --- optical elements ------------------------------------------------------


class WrongModeKind(CheshireError):
    """An element was aimed at a mode of the wrong kind (path vs polarization)."""


class ConstraintsNotIsometric(CheshireError):
    """Routing constraints cannot be extended to a unitary."""


# --- weak values -----------------------------------------------------------


class OrthogonalSelection(CheshireError):
    """Pre- and postselection overlap below the floor: weak value undefined."""


# --- pointer / meter model ---------------------------------------------------


class GridTooCoarse(CheshireError):
    """Pointer grid cannot hold the wavepacket to the required accuracy."""


class ShiftExceedsGrid(CheshireError):
    """Requested pointer translation would leave the grid."""


class PostselectionImpossible(CheshireError):
    """Postselection probability is (numerically) zero."""


class ZeroCoupling(CheshireError):
    """Weak-value estimation needs a strictly positive coupling."""


# --- scenario documents -----------------------------------------------------


class ParseError(CheshireError):
    """Scenario document does not conform to the grammar."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ValidationError(CheshireError):
    """Scenario document parsed but describes an unusable setup."""
