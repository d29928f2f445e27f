"""Exception and warning types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside the operation's domain (nonpositive size, bad index, ...)."""


class ConfigurationError(ValueError):
    """A run or bound evaluation is missing something it needs."""


class DomainError(ValueError):
    """A numerical routine was asked to work outside where it is defined."""


class SizeError(ValueError):
    """An exact enumeration would exceed its budget."""


class StepSizeWarning(UserWarning):
    """A step size exceeds the ceiling under which a bound is proved."""
