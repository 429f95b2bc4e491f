"""Exception and warning types shared across the package."""


class BernoulliFactoryError(Exception):
    """Base class for all package errors."""


class DomainError(BernoulliFactoryError, ValueError):
    """A parameter lies outside the domain an operation accepts."""


class InfeasibleBoundError(DomainError):
    """The running-time bound is infinite because r >= 1."""


class InputExhaustedError(BernoulliFactoryError):
    """An external coin stream ran out of flips mid-run."""

    def __init__(self, flips_used: int):
        super().__init__(f"coin stream exhausted after {flips_used} flips")
        self.flips_used = flips_used


class NonTerminationError(BernoulliFactoryError):
    """A safety guard on the number of draws was hit."""


class InvariantError(BernoulliFactoryError):
    """Internal state left the range where the sampler is exact."""


class StreamFormatError(BernoulliFactoryError, ValueError):
    """A coin stream contained a byte other than '0', '1' or whitespace."""


class InfeasibleBoundWarning(UserWarning):
    """Parameters are valid for sampling but the running-time bound diverges."""
