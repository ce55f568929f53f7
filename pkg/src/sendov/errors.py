"""Exception types raised across the package."""


class SendovError(Exception):
    """Base class for all package errors."""


class InvalidSpec(SendovError, ValueError):
    """A polynomial description violates its invariants."""


class DegreeTooLarge(SendovError, ValueError):
    pass


class QuadratureNoConvergence(SendovError, ArithmeticError):
    """Adaptive quadrature hit its depth cap before meeting tolerance."""


class NoConvergence(SendovError, ArithmeticError):
    """Simultaneous root iteration did not converge within the sweep cap."""


class OnCircleAmbiguity(SendovError, ArithmeticError):
    """A root sits so close to the counting circle that the winding is undecidable."""


class MethodDisagreement(SendovError, ArithmeticError):
    """Root finding and zero counting gave conflicting membership verdicts."""


class EndpointUndefined(SendovError, ValueError):
    pass


class RootOutsideDisk(SendovError, ValueError):
    pass


class NotRealPolynomial(SendovError, ValueError):
    pass


class BetaExceedsOne(SendovError, ValueError):
    pass


class BudgetExhausted(SendovError):
    pass


class NoFeasibleResult(SendovError):
    """No start of a multistart search produced a member of S(beta)."""
