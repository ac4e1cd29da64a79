"""Integral-free checks: ray casting, projected crossing signs, Gamma identities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InputError, NonGenericProjection, PointOnBoundary
from .geometry import ClosedCurve, Polyline, sample_polyline
from .invariants import sphere_volume
from .quadrature import integral_even_decay


@dataclass(frozen=True)
class Crossing:
    i: int  # segment on the first polyline
    j: int  # segment on the second polyline
    sign: int
    over: int  # 1 when the first polyline is nearer the viewer, else 2


def raycast_winding(p: Polyline, q) -> int:
    """Winding number of a closed planar polyline around ``q`` by ray casting.

    The ray runs from ``q`` towards +x; upward crossings count +1, downward -1,
    and a vertex on the ray belongs to the segment that starts there.
    """
    q = np.asarray(q, dtype=float)
    if p.dim != 2 or q.shape != (2,):
        raise DimensionMismatch("raycast_winding works in the plane")
    count, on_boundary = _kernels.raycast(p.vertices, q)
    if on_boundary:
        raise PointOnBoundary(f"point {q.tolist()} lies within 1e-9 of the polyline")
    return count


def _view_basis(direction):
    v = np.asarray(direction, dtype=float)
    if v.shape != (3,) or not np.linalg.norm(v) > 0:
        raise InputError("projection direction must be a non-zero 3-vector")
    v = v / np.linalg.norm(v)
    helper = np.eye(3)[int(np.argmin(np.abs(v)))]
    e1 = np.cross(helper, v)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    return e1, e2, v  # e1 x e2 = v


def _project(poly: Polyline, basis):
    e1, e2, v = basis
    V = poly.vertices
    return np.stack([V @ e1, V @ e2], axis=1), V @ v


def crossing_sign_linking(p1: Polyline, p2: Polyline, direction=(0.0, 0.0, 1.0)) -> int:
    """Half the signed count of crossings between the two projected polylines.

    The sign of a crossing is ``sgn det(x - y, a, b)`` where ``x``/``y`` are the
    stacked points and ``a``/``b`` the segment directions, i.e. the depth order
    along ``direction`` times the orientation of the projected pair.
    """
    if p1.dim != 3 or p2.dim != 3:
        raise DimensionMismatch("crossing_sign_linking takes polylines in R^3")
    basis = _view_basis(direction)
    P, DP = _project(p1, basis)
    Q, DQ = _project(p2, basis)
    total, nongeneric = _kernels.crossings(P, DP, Q, DQ)
    if nongeneric or total % 2:
        raise NonGenericProjection(f"projection along {np.round(basis[2], 6).tolist()} is not generic")
    return total // 2


def list_crossings(p1: Polyline, p2: Polyline, direction=(0.0, 0.0, 1.0)) -> list[Crossing]:
    """Every inter-component crossing, for inspection; slow, pure python."""
    basis = _view_basis(direction)
    P, DP = _project(p1, basis)
    Q, DQ = _project(p2, basis)
    out = []
    n1, n2 = len(P), len(Q)
    for i in range(n1):
        a0, a = P[i], P[(i + 1) % n1] - P[i]
        for j in range(n2):
            b0, b = Q[j], Q[(j + 1) % n2] - Q[j]
            den = a[0] * b[1] - a[1] * b[0]
            if den == 0.0:
                continue
            w = b0 - a0
            s = (w[0] * b[1] - w[1] * b[0]) / den
            u = (w[0] * a[1] - w[1] * a[0]) / den
            if 0.0 <= s < 1.0 and 0.0 <= u < 1.0:
                gap = (DP[i] + s * (DP[(i + 1) % n1] - DP[i])) - (DQ[j] + u * (DQ[(j + 1) % n2] - DQ[j]))
                out.append(Crossing(i, j, int(np.sign(gap) * np.sign(den)), 1 if gap > 0 else 2))
    return out


def crossing_linking_curves(c1: ClosedCurve, c2: ClosedCurve, vertices: int = 256, seed: int = 0, tries: int = 20):
    """Crossing oracle on sampled curves, retrying random directions when needed.

    The first attempt looks down a slightly tilted x3 axis.
    Returns ``(value, direction)``.
    """
    p1, p2 = sample_polyline(c1, vertices), sample_polyline(c2, vertices)
    rng = np.random.default_rng(seed)
    direction = np.array([0.0123, 0.0271, 1.0])
    for _ in range(tries):
        try:
            return crossing_sign_linking(p1, p2, direction), direction
        except NonGenericProjection:
            direction = rng.normal(size=3)
    raise NonGenericProjection(f"no generic projection found in {tries} random directions")


def gamma_identity_lhs(p: int, a: float) -> float:
    """Numeric ``integral dz / (a + z^2)^((p+1)/2)`` over the real line."""
    if p < 1 or not a > 0:
        raise InputError("need p >= 1 and a > 0")
    return integral_even_decay(lambda z: (a + z * z) ** (-(p + 1) / 2), p + 1)


def gamma_identity_forms(p: int, a: float) -> tuple[float, float]:
    """Closed forms: the Gamma-function ratio and the sphere-volume ratio."""
    if p < 1 or not a > 0:
        raise InputError("need p >= 1 and a > 0")
    log_val = 0.5 * math.log(math.pi) - 0.5 * p * math.log(a) + math.lgamma(p / 2) - math.lgamma((p + 1) / 2)
    by_gamma = math.exp(log_val)
    by_spheres = a ** (-p / 2) * sphere_volume(p) / sphere_volume(p - 1)
    return by_gamma, by_spheres


def gamma_identity_rhs(p: int, a: float) -> float:
    by_gamma, by_spheres = gamma_identity_forms(p, a)
    if abs(by_gamma - by_spheres) > 1e-12 * max(1.0, abs(by_gamma)):
        raise ArithmeticError(f"Gamma and sphere-volume forms disagree for p={p}, a={a}")
    return by_gamma


def _tail_numeric(a: float, exponent: float, k: int) -> float:
    # integral over R^k of (a + |t|^2)^-exponent, peeled one coordinate at a time
    if k == 0:
        return a ** (-exponent)
    if k == 1:
        return integral_even_decay(lambda z: (a + z * z) ** (-exponent), 2 * exponent, scale=math.sqrt(a))

    def inner(z):
        return np.array([_tail_numeric(a + zi * zi, exponent, k - 1) for zi in np.atleast_1d(z)])

    return integral_even_decay(inner, 2 * exponent - (k - 1), scale=math.sqrt(a))


def iterated_tail_identity(p: int, k: int, rho: float) -> tuple[float, float]:
    """``(numeric, closed_form)`` for the k-fold tail integral.

    ``integral_{R^k} dt / (rho^2 + |t|^2)^((p+1)/2)`` against
    ``vol S^p / vol S^(p-k) / rho^(p-k+1)``.
    """
    if not 1 <= k <= 3:
        raise InputError("k must be 1, 2 or 3")
    if p - k < 1:
        raise InputError("need p - k >= 1")
    if not rho > 0:
        raise InputError("rho must be positive")
    numeric = _tail_numeric(rho * rho, (p + 1) / 2, k)
    closed = sphere_volume(p) / sphere_volume(p - k) / rho ** (p - k + 1)
    return numeric, closed
