"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class MuntzError(Exception):
    """Base class for all library errors."""


class HorizonExceeded(MuntzError):
    """A query reached past the materialized part of an explicit sequence."""


class NonPositiveGap(MuntzError):
    """Exponents tie or decrease; every construction here needs a positive gap."""


class EmptyGrid(MuntzError):
    pass


class PoleError(MuntzError):
    """Evaluation requested at (or too close to) a pole."""


class TruncationInsufficient(MuntzError):
    """The truncated product cannot represent the requested point."""


class KernelOverflow(MuntzError):
    """Log-modulus of a kernel exceeds the double range."""


class SieveViolation(MuntzError):
    pass


class DomainViolation(MuntzError):
    """Transform argument lies outside the region where the integral converges."""


class NonConvergent(MuntzError):
    """Integrand along the requested half-line does not decay."""


class HorizonTooSmall(MuntzError):
    """Finite-horizon surrogate of an infimum or integral is still moving at the edge."""


class IllConditioned(MuntzError):
    pass


class InsufficientSamples(MuntzError):
    pass


class PreconditionViolation(MuntzError):
    pass
