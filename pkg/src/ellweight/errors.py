"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the region where a product or formula converges."""


class PoleError(ArithmeticError):
    """A denominator vanished (to within the pole tolerance).

    ``label`` names the offending factor so callers can report which
    bracket or product index blew up.
    """

    def __init__(self, message, label=None):
        super().__init__(message)
        self.label = label


class ContourError(RuntimeError):
    """A quadrature integrand has a pole on (or pinching) the integration torus."""
