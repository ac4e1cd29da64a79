"""Curves, parameterised manifolds, hyperplanes, polylines and isometries.

Every object that takes part in a linking integral exposes the same small
interface: ``intrinsic_dim``, ``ambient_dim``, ``periodic`` (one flag per
parameter) and the vectorised ``evaluate(U)`` / ``jacobian(U)`` where ``U`` has
shape ``(N, intrinsic_dim)``. Parameters live in ``[0, 1]``; periodic ones wrap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from .errors import DimensionMismatch, DisjointnessViolation, ImmersionFailure, InputError

IMMERSION_EPS = 1e-9
DISJOINT_EPS = 1e-6
FD_STEP = 1e-6

PointFn = Callable[[np.ndarray], np.ndarray]


def _as_params(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """Closed parametric curve ``t -> R^d``, ``t`` in ``[0, 1)``.

    ``point_fn`` maps a 1-D array of wrapped parameters to an ``(N, d)`` array.
    ``deriv_fn`` is the analytic derivative; sampled curves leave it ``None``
    and get central differences of their spline instead.
    """

    dim: int
    point_fn: PointFn
    deriv_fn: PointFn | None = None
    source: dict = field(default_factory=dict)

    intrinsic_dim = 1

    @property
    def ambient_dim(self) -> int:
        return self.dim

    @property
    def periodic(self) -> tuple[bool, ...]:
        return (True,)

    def eval(self, t):
        ts, scalar = _as_params(t)
        pts = self.point_fn(np.mod(ts, 1.0))
        return pts[0] if scalar else pts

    def tangent(self, t, check: bool = True):
        ts, scalar = _as_params(t)
        ts = np.mod(ts, 1.0)
        if self.deriv_fn is not None:
            der = self.deriv_fn(ts)
        else:
            fwd = self.point_fn(np.mod(ts + FD_STEP, 1.0))
            bwd = self.point_fn(np.mod(ts - FD_STEP, 1.0))
            der = (fwd - bwd) / (2 * FD_STEP)
        if check:
            speed = np.linalg.norm(der, axis=1)
            bad = np.flatnonzero(speed < IMMERSION_EPS)
            if bad.size:
                raise ImmersionFailure(
                    f"curve is not immersed at t={ts[bad[0]]:.6g} (|velocity|={speed[bad[0]]:.3g})"
                )
        return der[0] if scalar else der

    def evaluate(self, U):
        return self.eval(np.asarray(U, dtype=float).reshape(-1))

    def jacobian(self, U):
        return self.tangent(np.asarray(U, dtype=float).reshape(-1))[:, :, None]

    def transformed(self, rotation, translation) -> "ClosedCurve":
        R = np.asarray(rotation, dtype=float)
        b = np.asarray(translation, dtype=float)
        point_fn = self.point_fn
        deriv_fn = self.deriv_fn
        if deriv_fn is None:
            # keep finite differences on the transformed spline consistent
            new_deriv = None
        else:
            def new_deriv(t):
                return deriv_fn(t) @ R.T
        return ClosedCurve(
            R.shape[0],
            lambda t: point_fn(t) @ R.T + b,
            new_deriv,
            dict(self.source, isometry=True),
        )

    def reversed(self) -> "ClosedCurve":
        point_fn, deriv_fn = self.point_fn, self.deriv_fn
        new_deriv = None if deriv_fn is None else (lambda t: -deriv_fn(np.mod(-t, 1.0)))
        return ClosedCurve(
            self.dim, lambda t: point_fn(np.mod(-t, 1.0)), new_deriv, dict(self.source, reversed=True)
        )

    def restricted(self, h: "Hyperplane", tol: float = 1e-9, samples: int = 1024) -> "ClosedCurve":
        """The same curve written in the free coordinates of ``h``."""
        h.check_contains(self, tol=tol, samples=samples)
        free = h.free_coords(self.dim)
        point_fn, deriv_fn = self.point_fn, self.deriv_fn
        new_deriv = None if deriv_fn is None else (lambda t: deriv_fn(t)[:, free])
        return ClosedCurve(len(free), lambda t: point_fn(t)[:, free], new_deriv, dict(self.source))


def sampled_curve(vertices, knots=None, source: dict | None = None) -> ClosedCurve:
    """Periodic cubic interpolant through ``vertices``.

    Vertex ``k`` sits at parameter ``k / len(vertices)`` unless ``knots`` gives
    an increasing list of parameters in ``[0, 1)``.
    """
    V = np.asarray(vertices, dtype=float)
    if V.ndim != 2 or V.shape[0] < 4 or V.shape[1] < 2:
        raise InputError(f"need at least 4 vertices of dimension >= 2, got shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise InputError("vertices must be finite")
    k = V.shape[0]
    if knots is None:
        knots = np.arange(k) / k
    knots = np.asarray(knots, dtype=float)
    if knots.shape != (k,) or np.any(np.diff(knots) <= 0) or knots[0] < 0 or knots[-1] >= 1:
        raise InputError("knots must increase strictly inside [0, 1)")
    gaps = np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1)
    if np.any(gaps <= 1e-12):
        raise InputError("consecutive vertices must be distinct")
    x = np.append(knots, knots[0] + 1.0)
    y = np.vstack([V, V[:1]])
    spline = CubicSpline(x - knots[0], y, axis=0, bc_type="periodic")
    t0 = knots[0]

    def point_fn(t):
        return spline(np.mod(t - t0, 1.0))

    src = source if source is not None else {"kind": "samples", "vertices": V.tolist()}
    return ClosedCurve(V.shape[1], point_fn, None, src)


@dataclass(frozen=True, eq=False)
class PatchManifold:
    """Map ``[0,1]^n -> R^d`` with per-coordinate periodicity.

    Non-periodic coordinates are only allowed where the chart degenerates to a
    closed image (the poles of a sphere); ``degeneracies`` records that.
    The coordinate order fixes the orientation.
    """

    intrinsic_dim: int
    ambient_dim: int
    periodic: tuple[bool, ...]
    point_fn: PointFn
    jac_fn: PointFn
    source: dict = field(default_factory=dict)
    degeneracies: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.periodic) != self.intrinsic_dim:
            raise DimensionMismatch("one periodicity flag per intrinsic coordinate")
        for flag, note in zip(self.periodic, self.degeneracies or ("",) * self.intrinsic_dim):
            if not flag and not note and self.intrinsic_dim > 0:
                raise InputError("non-periodic coordinates need a degeneracy note")

    def _wrap(self, U):
        U = np.asarray(U, dtype=float)
        if self.intrinsic_dim == 0:
            return U.reshape(U.shape[0] if U.ndim == 2 else 1, 0)
        U = U.reshape(-1, self.intrinsic_dim)
        if self.intrinsic_dim:
            U = U.copy()
            per = np.asarray(self.periodic)
            U[:, per] = np.mod(U[:, per], 1.0)
        return U

    def evaluate(self, U):
        return self.point_fn(self._wrap(U))

    def jacobian(self, U):
        return self.jac_fn(self._wrap(U))

    def transformed(self, rotation, translation) -> "PatchManifold":
        R = np.asarray(rotation, dtype=float)
        b = np.asarray(translation, dtype=float)
        pf, jf = self.point_fn, self.jac_fn
        return PatchManifold(
            self.intrinsic_dim,
            R.shape[0],
            self.periodic,
            lambda U: pf(U) @ R.T + b,
            lambda U: np.einsum("ij,njk->nik", R, jf(U)),
            dict(self.source, isometry=True),
            self.degeneracies,
        )

    def restricted(self, h: "Hyperplane", tol: float = 1e-9, samples: int = 64) -> "PatchManifold":
        h.check_contains(self, tol=tol, samples=samples)
        free = h.free_coords(self.ambient_dim)
        pf, jf = self.point_fn, self.jac_fn
        return PatchManifold(
            self.intrinsic_dim,
            len(free),
            self.periodic,
            lambda U: pf(U)[:, free],
            lambda U: jf(U)[:, free, :],
            dict(self.source),
            self.degeneracies,
        )


def point_manifold(point) -> PatchManifold:
    """A single point viewed as a 0-dimensional closed manifold."""
    p = np.asarray(point, dtype=float).reshape(1, -1)
    d = p.shape[1]
    return PatchManifold(
        0,
        d,
        (),
        lambda U: np.repeat(p, len(U), axis=0),
        lambda U: np.zeros((len(U), d, 0)),
        {"kind": "point", "coords": p[0].tolist()},
    )


def as_manifold(obj):
    """Anything with the manifold interface; bare points become 0-manifolds."""
    if isinstance(obj, (ClosedCurve, PatchManifold)):
        return obj
    return point_manifold(obj)


@dataclass(frozen=True)
class Polyline:
    vertices: np.ndarray
    closed: bool = True

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < 3:
            raise InputError("polyline needs at least 3 vertices")
        gaps = np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1)
        if np.any(gaps <= 1e-12):
            raise InputError("consecutive polyline vertices must be distinct")
        object.__setattr__(self, "vertices", V)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def __len__(self):
        return self.vertices.shape[0]


def sample_polyline(c: ClosedCurve, n: int) -> Polyline:
    if n < 8:
        raise InputError(f"sample_polyline needs n >= 8, got {n}")
    t = np.arange(n) / n
    c.tangent(t)  # raises ImmersionFailure
    return Polyline(c.eval(t))


@dataclass(frozen=True)
class Hyperplane:
    """Axis-aligned affine subspace ``{x[k] = value_k for k in fixed_coords}``."""

    fixed_coords: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.fixed_coords) != len(self.values) or not self.fixed_coords:
            raise InputError("hyperplane needs one value per fixed coordinate")
        if len(set(self.fixed_coords)) != len(self.fixed_coords):
            raise InputError("repeated fixed coordinate")
        object.__setattr__(self, "fixed_coords", tuple(int(k) for k in self.fixed_coords))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def axis(cls, k: int, value: float = 0.0) -> "Hyperplane":
        return cls((k,), (value,))

    @property
    def codim(self) -> int:
        return len(self.fixed_coords)

    def free_coords(self, d: int) -> list[int]:
        if max(self.fixed_coords) >= d:
            raise DimensionMismatch(f"hyperplane fixes coordinate beyond dimension {d}")
        return [i for i in range(d) if i not in self.fixed_coords]

    def project(self, points):
        pts = np.asarray(points, dtype=float)
        return pts[..., self.free_coords(pts.shape[-1])]

    def offset(self, points):
        """Signed offsets ``x[k] - value_k``, shape ``(..., codim)``."""
        pts = np.asarray(points, dtype=float)
        return pts[..., list(self.fixed_coords)] - np.asarray(self.values)

    def check_contains(self, obj, tol: float = 1e-9, samples: int = 64):
        pts = sample_points(obj, samples)
        err = float(np.max(np.abs(self.offset(pts))))
        if err > tol:
            raise InputError(f"object leaves the hyperplane by {err:.3g} (> {tol:g})")

    def contains(self, obj, tol: float = 1e-9, samples: int = 64) -> bool:
        try:
            self.check_contains(obj, tol, samples)
        except InputError:
            return False
        return True

    def __str__(self):
        return ",".join(f"x{k + 1}={v:g}" for k, v in zip(self.fixed_coords, self.values))


@dataclass(frozen=True)
class Isometry:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        b = np.asarray(self.translation, dtype=float)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or b.shape != (R.shape[0],):
            raise DimensionMismatch("rotation must be d x d and translation length d")
        if np.max(np.abs(R.T @ R - np.eye(R.shape[0]))) > 1e-12:
            raise InputError("rotation is not orthogonal to 1e-12")
        if np.linalg.det(R) < 0:
            raise InputError("rotation must preserve orientation")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", b)

    @property
    def dim(self) -> int:
        return self.rotation.shape[0]

    @classmethod
    def identity(cls, d: int) -> "Isometry":
        return cls(np.eye(d), np.zeros(d))

    @classmethod
    def random(cls, d: int, rng, translation_scale: float = 0.0, fixed_axes: Sequence[int] = ()):
        """Uniform random rotation acting on the axes not in ``fixed_axes``."""
        from scipy.stats import special_ortho_group

        free = [i for i in range(d) if i not in fixed_axes]
        R = np.eye(d)
        if len(free) >= 2:
            sub = special_ortho_group.rvs(len(free), random_state=rng)
            # re-orthonormalise so the 1e-12 check is met with margin
            q, r = np.linalg.qr(sub)
            q = q * np.sign(np.diag(r))
            if np.linalg.det(q) < 0:
                q[:, 0] = -q[:, 0]
            R[np.ix_(free, free)] = q
        b = np.zeros(d)
        if translation_scale:
            b[free] = rng.normal(scale=translation_scale, size=len(free))
        return cls(R, b)

    def apply(self, points):
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation


def sample_params(obj, per_dim: int) -> np.ndarray:
    n = obj.intrinsic_dim
    if n == 0:
        return np.zeros((1, 0))
    axes = []
    for flag in obj.periodic:
        if flag:
            axes.append(np.arange(per_dim) / per_dim)
        else:
            axes.append(np.linspace(0.0, 1.0, per_dim))
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def sample_points(obj, per_dim: int) -> np.ndarray:
    return as_manifold(obj).evaluate(sample_params(as_manifold(obj), per_dim))


def _default_samples(obj) -> int:
    return {0: 1, 1: 256, 2: 48}.get(obj.intrinsic_dim, 16)


def min_distance(a, b, samples: int | None = None, polish: bool = True) -> float:
    """Minimum distance between two images: grid sampling, then a local polish."""
    A, B = as_manifold(a), as_manifold(b)
    if A.ambient_dim != B.ambient_dim:
        raise DimensionMismatch("objects live in different dimensions")
    Ua = sample_params(A, samples or _default_samples(A))
    Ub = sample_params(B, samples or _default_samples(B))
    Pa, Pb = A.evaluate(Ua), B.evaluate(Ub)
    best, bi, bj = np.inf, 0, 0
    chunk = max(1, (1 << 22) // max(1, len(Pb)))
    for s in range(0, len(Pa), chunk):
        d2 = np.sum((Pa[s : s + chunk, None, :] - Pb[None, :, :]) ** 2, axis=2)
        k = int(np.argmin(d2))
        i, j = divmod(k, d2.shape[1])
        if d2[i, j] < best:
            best, bi, bj = float(d2[i, j]), s + i, j
    best = float(np.sqrt(best))
    if not polish or best == 0.0 or (A.intrinsic_dim + B.intrinsic_dim) == 0:
        return best
    na = A.intrinsic_dim

    def fun(x):
        ua, ub = _clamp(x[:na], A), _clamp(x[na:], B)
        diff = A.evaluate(ua)[0] - B.evaluate(ub)[0]
        grad = np.concatenate([2.0 * diff @ A.jacobian(ua)[0], -2.0 * diff @ B.jacobian(ub)[0]])
        return float(diff @ diff), grad

    x0 = np.concatenate([Ua[bi], Ub[bj]])
    bounds = [None if flag else (0.0, 1.0) for flag in (*A.periodic, *B.periodic)]
    bounds = [(None, None) if b is None else b for b in bounds]
    res = minimize(fun, x0, jac=True, method="L-BFGS-B", bounds=bounds, options={"ftol": 1e-20, "gtol": 1e-14})
    return float(min(best, np.sqrt(max(res.fun, 0.0))))


def _clamp(u, obj):
    u = np.array(u, dtype=float).reshape(1, -1)
    for i, flag in enumerate(obj.periodic):
        if not flag:
            u[0, i] = min(1.0, max(0.0, u[0, i]))
    return u


def check_disjoint(a, b, label: str = "objects", eps: float = DISJOINT_EPS) -> float:
    dist = min_distance(a, b)
    if dist <= eps:
        raise DisjointnessViolation(
            f"{label} are not disjoint: minimum sampled distance {dist:.3g} <= {eps:g}",
            distance=dist,
        )
    return dist


@dataclass(frozen=True)
class Expected:
    pair: tuple[str, str]
    value: int
    provenance: str = ""


@dataclass(frozen=True, eq=False)
class Scene:
    """Named objects sharing one ambient space, plus declared linking values."""

    objects: dict
    ambient_dim: int
    expected: tuple[Expected, ...] = ()
    name: str = ""
    check: bool = True

    def __post_init__(self):
        object.__setattr__(self, "objects", dict(self.objects))
        for key, obj in self.objects.items():
            if as_manifold(obj).ambient_dim != self.ambient_dim:
                raise DimensionMismatch(
                    f"object {key!r} has dimension {as_manifold(obj).ambient_dim}, scene has {self.ambient_dim}"
                )
        for e in self.expected:
            for key in e.pair:
                if key not in self.objects:
                    raise InputError(f"expected value names unknown object {key!r}")
        if self.check:
            names = list(self.objects)
            for i, p in enumerate(names):
                for q in names[i + 1 :]:
                    check_disjoint(self.objects[p], self.objects[q], f"{p!r} and {q!r}")

    def __getitem__(self, key):
        try:
            return self.objects[key]
        except KeyError:
            raise InputError(f"scene has no object named {key!r}") from None

    def names(self) -> list[str]:
        return list(self.objects)

    def pairs(self) -> list[tuple[str, str]]:
        names = self.names()
        return [(p, q) for i, p in enumerate(names) for q in names[i + 1 :]]

    def expected_for(self, pair) -> Expected | None:
        """Declared value for ``pair`` in the given order, if any."""
        for e in self.expected:
            if tuple(e.pair) == tuple(pair):
                return e
        return None


def apply_isometry(s: Scene, g: Isometry) -> Scene:
    if g.dim != s.ambient_dim:
        raise DimensionMismatch(f"isometry acts on R^{g.dim}, scene lives in R^{s.ambient_dim}")
    moved = {k: v.transformed(g.rotation, g.translation) for k, v in s.objects.items()}
    return Scene(moved, s.ambient_dim, s.expected, s.name, check=s.check)
