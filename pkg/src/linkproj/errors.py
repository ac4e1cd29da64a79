"""Exception hierarchy shared by every module."""

from __future__ import annotations


class LinkingError(Exception):
    """Base class for all package errors."""


class InputError(LinkingError, ValueError):
    """Malformed input: bad scene file, unknown object, bad parameters."""


class UnknownFamily(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class ImmersionFailure(LinkingError):
    """A curve or patch has a vanishing derivative where one is required."""


class NonFiniteSample(LinkingError):
    def __init__(self, node, value=None):
        self.node = node
        self.value = value
        super().__init__(f"integrand is not finite at node {node!r} (value {value!r})")


class ToleranceNotReached(LinkingError):
    """Refinement hit its node cap before successive values agreed.

    ``best`` is the last computed value and ``estimate`` the last delta. Callers
    that wrap quadrature in richer results attach them as ``result``.
    """

    def __init__(self, best, estimate, quadrature=None, result=None):
        self.best = best
        self.estimate = estimate
        self.quadrature = quadrature
        self.result = result
        super().__init__(
            f"tolerance not reached: best value {best!r}, last delta {estimate:.3e}"
        )


class DisjointnessViolation(LinkingError):
    def __init__(self, message, distance=None, lam=None):
        self.distance = distance
        self.lam = lam
        super().__init__(message)


class PointOnCurve(LinkingError):
    pass


class PointOnBoundary(LinkingError):
    pass


class NonTransverse(LinkingError):
    pass


class OpenContour(LinkingError):
    pass


class NonGenericProjection(LinkingError):
    pass
