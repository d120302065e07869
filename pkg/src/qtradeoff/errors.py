"""Exception hierarchy shared across the package."""


class TradeoffError(ValueError):
    """Base class for domain errors raised by qtradeoff."""


class ConvergenceError(TradeoffError):
    """The Jacobi eigensolver hit its sweep cap."""


class RankDeficient(TradeoffError):
    """A state that must be full rank has an eigenvalue at or below the floor."""


class NonRegularModel(TradeoffError):
    """The SLD Fisher matrix is singular, so the model is not a regular two-parameter model."""


class NoIntersection(TradeoffError):
    """The SLD lines and the RLD hyperbola do not cross."""


class PositivityViolation(TradeoffError):
    """A constructed reference state is not positive definite."""


class DegenerateGeometry(TradeoffError):
    """A generator vector is parallel to (1, 1, 1), or the pair collapses to one parameter."""


class DomainError(TradeoffError):
    """An argument lies outside the domain where a closed form is defined."""
