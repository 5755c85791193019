"""Exception hierarchy shared by every mechanism."""


class PrivacyError(Exception):
    """Base class for all errors raised by podium_dp."""


class InvalidParameter(PrivacyError, ValueError):
    pass


class NonPositiveEpsilon(InvalidParameter):
    pass


class NonPositiveSensitivity(InvalidParameter):
    pass


class NonPositiveVariance(InvalidParameter):
    pass


class OutOfDomain(PrivacyError, ValueError):
    """A raw input lies outside the a-priori domain; never clamped."""


class InputOutOfRange(OutOfDomain):
    """A centered input lies outside [-delta/2, delta/2]."""


class ZeroDensity(PrivacyError):
    """Two output densities disagree on support, so no finite ratio bound exists."""


class ToleranceNotMet(PrivacyError):
    pass


class RegimeMismatch(InvalidParameter):
    pass


class InternalConsistencyError(PrivacyError):
    pass
