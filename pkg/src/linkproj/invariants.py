"""Linking integrals: Gauss in R^3, the degree integral in R^(m+n+1), winding numbers.

Sign convention, used everywhere: ``r = x - y`` with ``x`` on the first object
and ``y`` on the second, and determinant columns ordered
``(r, first-object partials, second-object partials)``. The linking number is

    lk(M, N) = 1/vol(S^p) * integral det(r, dx/ds, dy/dt) / |r|^(p+1) ds dt,

``p = m + n``. For two curves in R^3 this is the classical Gauss integral and
for a planar curve around a point it is the winding number.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatch,
    DisjointnessViolation,
    InputError,
    PointOnCurve,
    ToleranceNotReached,
)
from .geometry import DISJOINT_EPS, ClosedCurve, as_manifold, min_distance, point_manifold
from .quadrature import QuadratureResult, refine, tensor_rule

CERTIFY_EPS = 1e-3


class UncertifiedWarning(UserWarning):
    pass


def sphere_volume(p: int) -> float:
    """Surface measure of the unit sphere S^p in R^(p+1)."""
    if not 0 <= p <= 20:
        raise InputError(f"sphere_volume needs 0 <= p <= 20, got {p}")
    return 2.0 * math.pi ** ((p + 1) / 2) / math.gamma((p + 1) / 2)


@dataclass(frozen=True)
class LinkingResult:
    raw: float
    rounded: int
    residual: float
    quadrature: QuadratureResult | None = None
    warnings: tuple[str, ...] = field(default=())

    @classmethod
    def from_raw(cls, raw: float, quadrature=None, notes=()) -> "LinkingResult":
        rounded = int(round(raw))
        residual = abs(raw - rounded)
        notes = tuple(notes)
        if residual >= CERTIFY_EPS:
            notes += (f"uncertified: residual {residual:.3g} >= {CERTIFY_EPS:g}",)
        return cls(float(raw), rounded, residual, quadrature, notes)

    @property
    def certified(self) -> bool:
        return self.residual < CERTIFY_EPS

    @property
    def evaluations(self) -> int:
        return self.quadrature.evaluations if self.quadrature else 0


def combine(results, signs) -> LinkingResult:
    """Signed sum of linking results, aggregating quadrature bookkeeping."""
    results = list(results)
    raw = float(sum(s * r.raw for s, r in zip(signs, results)))
    quads = [r.quadrature for r in results if r.quadrature is not None]
    if quads:
        widest = max((x.nodes_per_dim for x in quads), key=lambda t: (len(t), t))
        q = QuadratureResult(
            raw,
            float(sum(x.error_estimate for x in quads)),
            widest,
            max(x.refinements for x in quads),
            sum(x.evaluations for x in quads),
        )
    else:
        q = QuadratureResult(0.0, 0.0, (), 0, 0)
    notes = []
    for r in results:
        notes.extend(r.warnings)
    return LinkingResult.from_raw(raw, q, notes)


def _default_max_nodes(ndim: int) -> int:
    return {1: 4096, 2: 1024}.get(ndim, 128)


def linking_integral(M, N, nodes_M, nodes_N):
    """One fixed-node evaluation of the normalised linking integral.

    Returns ``(value, min_distance_over_nodes)``.
    """
    M, N = as_manifold(M), as_manifold(N)
    p = M.intrinsic_dim + N.intrinsic_dim
    UX, WX = tensor_rule(M.periodic, nodes_M)
    UY, WY = tensor_rule(N.periodic, nodes_N)
    X, JX = M.evaluate(UX), M.jacobian(UX).reshape(len(UX), M.ambient_dim, M.intrinsic_dim)
    Y, JY = N.evaluate(UY), N.jacobian(UY).reshape(len(UY), N.ambient_dim, N.intrinsic_dim)
    rows, dmin = _kernels.pair_rows(X, JX, Y, JY, WY)
    return float(np.dot(WX, rows)) / sphere_volume(p), dmin


def _refined(M, N, tol, start_nodes, max_nodes, label):
    M, N = as_manifold(M), as_manifold(N)
    m, n = M.intrinsic_dim, N.intrinsic_dim
    if M.ambient_dim != N.ambient_dim:
        raise DimensionMismatch("objects live in different dimensions")
    if M.ambient_dim != m + n + 1:
        raise DimensionMismatch(
            f"linking needs ambient dimension m+n+1 = {m + n + 1}, got {M.ambient_dim}"
        )
    dist = min_distance(M, N)
    if dist <= DISJOINT_EPS:
        raise DisjointnessViolation(f"{label}: images meet (minimum distance {dist:.3g})", distance=dist)

    def evaluate(nodes):
        value, dmin = linking_integral(M, N, nodes[:m], nodes[m:])
        if dmin <= DISJOINT_EPS:
            raise DisjointnessViolation(f"{label}: quadrature nodes meet (distance {dmin:.3g})", distance=dmin)
        return value

    if max_nodes is None:
        max_nodes = _default_max_nodes(m + n)
    try:
        q = refine(evaluate, m + n, tol, start_nodes, max_nodes)
    except ToleranceNotReached as exc:
        exc.result = LinkingResult.from_raw(
            exc.best, exc.quadrature, (f"not converged: last delta {exc.estimate:.3g}",)
        )
        raise
    res = LinkingResult.from_raw(q.value, q)
    if not res.certified:
        warnings.warn(f"{label}: {res.warnings[-1]}", UncertifiedWarning, stacklevel=3)
    return res


def degree_linking(M, N, tol: float = 1e-8, start_nodes: int = 16, max_nodes: int | None = None):
    """Linking number of ``M^m`` and ``N^n`` in ``R^(m+n+1)`` by direct quadrature.

    ``N`` may be a bare point (a 0-manifold), which turns the integral into a
    degree of ``M`` around that point.
    """
    return _refined(M, N, tol, start_nodes, max_nodes, "degree_linking")


def gauss_linking_r3(c1: ClosedCurve, c2: ClosedCurve, tol: float = 1e-8, start_nodes: int = 16, max_nodes: int | None = None):
    """Gauss linking integral of two disjoint closed curves in R^3."""
    for c in (c1, c2):
        if not isinstance(c, ClosedCurve) or c.dim != 3:
            raise DimensionMismatch("gauss_linking_r3 takes two closed curves in R^3")
    return _refined(c1, c2, tol, start_nodes, max_nodes, "gauss_linking_r3")


def winding_number(c: ClosedCurve, p, tol: float = 1e-10, start_nodes: int = 16, max_nodes: int | None = None):
    """Winding number of a planar closed curve around ``p`` (counterclockwise positive)."""
    p = np.asarray(p, dtype=float)
    if not isinstance(c, ClosedCurve) or c.dim != 2 or p.shape != (2,):
        raise DimensionMismatch("winding_number takes a closed curve in R^2 and a point in R^2")
    pt = point_manifold(p)
    dist = min_distance(c, pt)
    if dist <= DISJOINT_EPS:
        raise PointOnCurve(f"point {p.tolist()} lies on the curve (distance {dist:.3g})")
    return _refined(c, pt, tol, start_nodes, max_nodes, "winding_number")


def swap_sign(m: int, n: int) -> int:
    """``lk(N, M) = swap_sign(m, n) * lk(M, N)`` under the fixed convention."""
    return -1 if (1 + m * n) % 2 else 1
