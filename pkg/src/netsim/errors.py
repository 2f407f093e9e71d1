"""Exception types shared across the package."""


class FormatError(ValueError):
    """A file does not conform to the expected on-disk format."""


class ShapeError(ValueError):
    """An array has the wrong dimensionality or incompatible dimensions."""


class DataError(ValueError):
    """Well-formed input carries values that violate an invariant."""


class DegenerateActivationsError(ValueError):
    """All-constant activations: CKA is undefined (zero norm after centering)."""


class UndefinedCorrelationError(ValueError):
    """Correlation requested on a constant vector."""
