"""Exception and warning classes shared across the package."""


class ParameterError(ValueError):
    """An argument is outside its allowed range or has the wrong shape."""


class DomainError(ValueError):
    """Inputs leave the regime where the formulas are defined."""


class NearOrthogonalPostselectionError(ArithmeticError):
    """Post-selected state is (numerically) orthogonal to the pre-selected one.

    The weak value has a pole there and cannot be evaluated.
    """


class ConfigError(ValueError):
    """Invalid scan configuration.  ``key`` is the dotted path of the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class NumericalError(RuntimeError):
    """A computed value is not finite."""


class RelativityWarning(UserWarning):
    """Mass-to-energy ratio is large enough that the first-order expansion degrades."""


class RegimeWarning(UserWarning):
    """A weak-measurement formula was used outside the weak regime."""
