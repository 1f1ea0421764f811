"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


class SingularityError(ArithmeticError):
    """A Fourier face of a tensor could not be inverted."""

    def __init__(self, face, cond):
        self.face = face
        self.cond = cond
        super().__init__(f"Fourier face {face} is singular (condition estimate {cond:.3e})")


class NumericError(ArithmeticError):
    """A non-finite value appeared where a finite one is required."""


class NoiseModelError(TypeError):
    """An operation was called with an observation set of the wrong noise model."""
