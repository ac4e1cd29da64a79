"""Hyperplane reduction of linking integrals.

If ``M`` lies in an axis hyperplane ``H = {x_k = c}`` and ``N`` meets ``H``
transversely in ``N'``, then ``lk(M, N) = lk_H(M, N')`` where the right-hand side
is computed in the free coordinates of ``H`` and each component of ``N'``
carries an orientation sign.

For a component of ``N'`` the sign is ``sgn det[T, grad f] * (-1)^(k+d-1)``:
``T`` is the component's tangent in ``N``'s parameter plane, ``f = x_k - c``
restricted to ``N``, and the second factor moves the row of the transverse
axis past the others so the determinant reduces to its ``H`` block. For a
curve ``N`` crossing ``H`` in points, ``det[T, grad f]`` is just the sign of
``d x_k / dt`` at the crossing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DisjointnessViolation,
    InputError,
    NonTransverse,
    OpenContour,
)
from .geometry import ClosedCurve, Hyperplane, PatchManifold, as_manifold, sample_points, sampled_curve
from .invariants import (
    LinkingResult,
    combine,
    degree_linking,
    gauss_linking_r3,
    swap_sign,
    winding_number,
)
from .quadrature import QuadratureResult

ROOT_SAMPLES = 1024
ROOT_EPS = 1e-12
GRAZE_EPS = 1e-9
TRANSVERSE_EPS = 1e-6


def axis_sign(k: int, d: int) -> int:
    return -1 if (k + d - 1) % 2 else 1


@dataclass(frozen=True)
class IntersectionPoint:
    location: np.ndarray
    sign: int
    parameter: float


@dataclass(frozen=True, eq=False)
class SliceCurve:
    """One closed component of ``N ∩ H``, written in ``H``'s free coordinates."""

    curve: ClosedCurve
    sign: int
    params: np.ndarray  # the loop in N's parameter square, unwrapped


def _single_axis(h: Hyperplane) -> tuple[int, float]:
    if h.codim != 1:
        raise InputError("only codimension-1 hyperplanes are supported for slicing")
    return h.fixed_coords[0], h.values[0]


def find_plane_intersections(c: ClosedCurve, h: Hyperplane | None = None, samples: int = ROOT_SAMPLES):
    """Transverse crossings of a closed curve with an axis hyperplane.

    Sign-change bracketing on ``samples`` uniform parameters, then bisection to
    ``|x_k - c| < 1e-12``. Returns points sorted by parameter.
    """
    h = h or Hyperplane.axis(2, 0.0)
    k, value = _single_axis(h)
    if k >= c.dim:
        raise DimensionMismatch(f"hyperplane axis {k} outside R^{c.dim}")

    def g(t):
        return c.eval(np.atleast_1d(t))[:, k] - value

    ts = np.arange(samples) / samples
    gs = g(ts)
    pos = gs >= 0.0
    change = pos != np.roll(pos, -1)  # between sample i and i+1
    near = np.abs(gs) < GRAZE_EPS
    touched = change | np.roll(change, 1)
    if np.any(near & ~touched):
        i = int(np.flatnonzero(near & ~touched)[0])
        raise NonTransverse(f"curve grazes {h} near t={ts[i]:.6g} without crossing")

    points = []
    for i in np.flatnonzero(change):
        lo, hi = ts[i], ts[i] + 1.0 / samples
        glo, ghi = gs[i], g(hi)[0]
        if abs(glo) < ROOT_EPS:
            root = lo
        elif abs(ghi) < ROOT_EPS:
            root = hi
        else:
            plo = glo >= 0.0
            root = 0.5 * (lo + hi)
            for _ in range(200):
                root = 0.5 * (lo + hi)
                gm = g(root)[0]
                if abs(gm) < ROOT_EPS or hi - lo < 1e-16:
                    break
                if (gm >= 0.0) == plo:
                    lo = root
                else:
                    hi = root
        root = float(root % 1.0)
        slope = float(c.tangent(root, check=False)[k])
        if abs(slope) < TRANSVERSE_EPS:
            raise NonTransverse(f"tangential contact with {h} at t={root:.6g}")
        loc = c.eval(root).copy()
        loc[k] = value
        points.append(IntersectionPoint(loc, 1 if slope > 0 else -1, root))
    if len(points) % 2 or sum(p.sign for p in points) != 0:
        raise NonTransverse(f"inconsistent crossings with {h}: {len(points)} found")
    return sorted(points, key=lambda p: p.parameter)


def planar_hyperplane(obj, tol: float = 1e-9) -> Hyperplane | None:
    """First axis hyperplane ``{x_k = c}`` containing ``obj``, if any."""
    obj = as_manifold(obj)
    pts = sample_points(obj, {0: 1, 1: 1024}.get(obj.intrinsic_dim, 64))
    for k in range(obj.ambient_dim):
        col = pts[:, k]
        if np.max(col) - np.min(col) <= tol:
            h = Hyperplane.axis(k, float(np.round(np.mean(col), 12)))
            if h.contains(obj, tol=tol, samples=1024 if obj.intrinsic_dim == 1 else 64):
                return h
    return None


def reduced_linking_curves(planar: ClosedCurve, transverse: ClosedCurve, tol: float = 1e-10, h: Hyperplane | None = None):
    """Signed sum of winding numbers of the planar curve around the crossings."""
    if planar.dim != 3 or transverse.dim != 3:
        raise DimensionMismatch("reduced_linking_curves works in R^3")
    h = h or Hyperplane.axis(2, 0.0)
    k, _ = _single_axis(h)
    flat = planar.restricted(h)
    crossings = find_plane_intersections(transverse, h)
    s = axis_sign(k, 3)
    results = [winding_number(flat, h.project(p.location), tol=tol) for p in crossings]
    res = combine(results, [s * p.sign for p in crossings])
    bad = [r for r in results if not r.certified]
    if bad:
        return LinkingResult.from_raw(res.raw, res.quadrature, res.warnings + ("a winding number is uncertified",))
    return res


# ---------------------------------------------------------------------------
# surface slicing


def _grid_axis(n: int, periodic: bool):
    if periodic:
        return np.arange(n) / n, n
    return np.linspace(0.0, 1.0, n), n - 1


def _wrap_diff(delta, periodic):
    out = np.array(delta, dtype=float)
    for i, flag in enumerate(periodic):
        if flag:
            out[..., i] -= np.round(out[..., i])
    return out


def slice_surface(N: PatchManifold, h: Hyperplane, grid: int = 512) -> list[SliceCurve]:
    """Closed components of ``N ∩ h`` by marching squares on the parameter square."""
    if N.intrinsic_dim != 2:
        raise DimensionMismatch("slice_surface takes a 2-dimensional patch manifold")
    if grid < 8:
        raise InputError("grid must be at least 8")
    k, value = _single_axis(h)
    d = N.ambient_dim
    if k >= d:
        raise DimensionMismatch(f"hyperplane axis {k} outside R^{d}")
    per = N.periodic

    def f(P):
        return N.evaluate(P)[:, k] - value

    ua, ca = _grid_axis(grid, per[0])
    ub, cb = _grid_axis(grid, per[1])
    A, B = np.meshgrid(ua, ub, indexing="ij")
    F = f(np.stack([A.ravel(), B.ravel()], axis=1)).reshape(A.shape)
    pos = F >= 0.0
    na, nb = len(ua), len(ub)

    def node_param(i, j):
        # unwrapped: index na maps to 1.0 in a periodic direction
        return np.array([i / na if per[0] else ua[i % na], j / nb if per[1] else ub[j % nb]])

    I, J = np.meshgrid(np.arange(ca), np.arange(cb), indexing="ij")
    I1, J1 = (I + 1) % na, (J + 1) % nb
    s0, s1, s2, s3 = pos[I, J], pos[I1, J], pos[I1, J1], pos[I, J1]
    active = ~((s0 == s1) & (s1 == s2) & (s2 == s3))
    cells = np.argwhere(active)
    if len(cells) == 0:
        return []

    # edges: ("h", i, j) joins nodes (i, j)-(i+1, j); ("v", i, j) joins (i, j)-(i, j+1)
    segments = []
    for i, j in cells:
        i1, j1 = (i + 1) % na, (j + 1) % nb
        c0, c1, c2, c3 = pos[i, j], pos[i1, j], pos[i1, j1], pos[i, j1]
        bottom, right, top, left = ("h", i, j), ("v", i1, j), ("h", i, j1), ("v", i, j)
        crossing = [e for e, flag in ((bottom, c0 != c1), (right, c1 != c2), (top, c2 != c3), (left, c3 != c0)) if flag]
        if len(crossing) == 2:
            segments.append(tuple(crossing))
        else:
            centre = 0.5 * (node_param(i, j) + node_param(i + 1, j + 1))
            if (f(centre[None, :])[0] >= 0.0) == c0:
                segments += [(bottom, right), (top, left)]
            else:
                segments += [(left, bottom), (right, top)]

    edges = sorted({e for seg in segments for e in seg})
    index = {e: n for n, e in enumerate(edges)}
    P0 = np.array([node_param(i, j) for _, i, j in edges])
    P1 = np.array([node_param(i + 1, j) if kind == "h" else node_param(i, j + 1) for kind, i, j in edges])
    roots = _edge_roots(f, P0, P1)

    incident: dict[int, list[int]] = {}
    for sid, (e0, e1) in enumerate(segments):
        incident.setdefault(index[e0], []).append(sid)
        incident.setdefault(index[e1], []).append(sid)
    for eid, sids in incident.items():
        if len(sids) != 2:
            raise OpenContour(
                f"slice by {h} reaches a chart boundary at parameters {np.round(roots[eid], 6).tolist()}"
            )

    used = np.zeros(len(segments), dtype=bool)
    loops = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        first, cur_edge = (index[e] for e in segments[start])
        loop = [first]
        while cur_edge != first:
            loop.append(cur_edge)
            nxt = [s for s in incident[cur_edge] if not used[s]]
            if not nxt:
                raise OpenContour(f"slice by {h} does not close")
            used[nxt[0]] = True
            a, b = (index[e] for e in segments[nxt[0]])
            cur_edge = b if a == cur_edge else a
        loops.append(loop)

    out = [_make_slice(N, h, roots[loop], per, k, d) for loop in loops]
    return sorted(out, key=lambda s: tuple(np.mod(s.params[0], 1.0)))


def _edge_roots(f, P0, P1, iters: int = 60):
    f0 = f(P0)
    plo = f0 >= 0.0
    lo = np.zeros(len(P0))
    hi = np.ones(len(P0))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(P0 + mid[:, None] * (P1 - P0))
        same = (fm >= 0.0) == plo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    t = np.where(np.abs(f0) == 0.0, 0.0, hi)
    return P0 + t[:, None] * (P1 - P0)


def _make_slice(N, h, loop_params, per, k, d) -> SliceCurve:
    P = np.mod(loop_params, 1.0)
    steps = _wrap_diff(np.diff(np.vstack([P, P[:1]]), axis=0), per)
    keep = np.linalg.norm(steps, axis=1) > 1e-14
    P, steps = P[keep], steps[keep]
    if len(P) < 4:
        raise NonTransverse(f"slice by {h} has a degenerate component")
    U = P[0] + np.vstack([np.zeros((1, 2)), np.cumsum(steps[:-1], axis=0)])
    winding = np.round(np.sum(steps, axis=0)).astype(int)
    nz = np.flatnonzero(winding)
    if nz.size:
        flip = winding[nz[0]] < 0
    else:
        x, y = U[:, 0], U[:, 1]
        flip = np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y) < 0
    if flip:
        U = U[::-1]
    start = min(range(len(U)), key=lambda i: tuple(np.mod(U[i], 1.0)))
    U = np.roll(U, -start, axis=0)
    U = U - (np.floor(U[0]) * np.asarray(per, dtype=float))

    J = N.jacobian(U)
    grad = J[:, k, :]
    gnorm = np.linalg.norm(grad, axis=1)
    if np.min(gnorm) < TRANSVERSE_EPS:
        raise NonTransverse(f"{h} is not transverse to the surface (|grad| = {np.min(gnorm):.3g})")
    T = _wrap_diff(np.roll(U, -1, axis=0) - np.roll(U, 1, axis=0), per)
    dets = T[:, 0] * grad[:, 1] - T[:, 1] * grad[:, 0]
    chart_sign = 1 if np.sum(dets) > 0 else -1

    pts = h.project(N.evaluate(U))
    gaps = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    keep = gaps > 1e-12
    pts, gaps = pts[keep], gaps[keep]
    knots = np.concatenate([[0.0], np.cumsum(gaps[:-1])]) / np.sum(gaps)
    curve = sampled_curve(pts, knots, {"kind": "slice", "hyperplane": str(h)})
    return SliceCurve(curve, chart_sign * axis_sign(k, d), U)


def reduced_linking_general(M, slices: Sequence[SliceCurve], h: Hyperplane, tol: float = 1e-8, **quad):
    """``sum_i sign_i * lk_H(M, N'_i)`` with ``M`` written in ``h``'s coordinates."""
    if not slices:
        return LinkingResult.from_raw(0.0, QuadratureResult(0.0, 0.0, (), 0, 0))
    M_H = as_manifold(M).restricted(h)
    results = [degree_linking(M_H, s.curve, tol=tol, **quad) for s in slices]
    return combine(results, [s.sign for s in slices])


@dataclass(frozen=True, eq=False)
class ReducedTerm:
    """``sign * lk_H(M_H, piece)`` contributes to a reduced linking number."""

    sign: int
    M_H: object
    piece: object  # a point (ndarray) or a ClosedCurve, in H's coordinates


def reduced_terms(A, B, h: Hyperplane | None = None, grid: int = 512):
    """Decompose ``lk(A, B)`` into signed linking numbers inside a hyperplane.

    One of the two objects must lie in an axis hyperplane (found automatically
    unless ``h`` is given); the other is cut by it into points (curves) or
    closed curves (surfaces). Returns ``(h, terms)``; swapping the roles of
    ``A`` and ``B`` is folded into the term signs.
    """
    A, B = as_manifold(A), as_manifold(B)
    if A.ambient_dim != B.ambient_dim or A.ambient_dim != A.intrinsic_dim + B.intrinsic_dim + 1:
        raise DimensionMismatch("reduction needs ambient dimension m+n+1")

    def inside(obj, plane):
        return plane.contains(obj, samples=1024 if obj.intrinsic_dim == 1 else 64)

    factor = 1
    if h is None:
        h = planar_hyperplane(A)
        if h is None:
            h = planar_hyperplane(B)
            if h is None:
                raise InputError("neither object lies in an axis hyperplane; reduction not applicable")
            factor = swap_sign(A.intrinsic_dim, B.intrinsic_dim)
            A, B = B, A
    elif not inside(A, h):
        if not inside(B, h):
            raise InputError(f"neither object lies in {h}")
        factor = swap_sign(A.intrinsic_dim, B.intrinsic_dim)
        A, B = B, A
    k, _ = _single_axis(h)
    d = A.ambient_dim
    M_H = A.restricted(h, samples=1024 if A.intrinsic_dim == 1 else 64)
    if B.intrinsic_dim == 1:
        terms = [
            ReducedTerm(factor * axis_sign(k, d) * p.sign, M_H, h.project(p.location))
            for p in find_plane_intersections(B, h)
        ]
    elif B.intrinsic_dim == 2:
        terms = [ReducedTerm(factor * s.sign, M_H, s.curve) for s in slice_surface(B, h, grid)]
    else:
        raise InputError(f"slicing a {B.intrinsic_dim}-manifold is not supported")
    return h, terms


def reduced_linking(A, B, h: Hyperplane | None = None, tol: float = 1e-8, grid: int = 512, **quad):
    """Linking number of ``A`` and ``B`` computed inside a hyperplane."""
    h, terms = reduced_terms(A, B, h, grid)
    if not terms:
        return LinkingResult.from_raw(0.0, QuadratureResult(0.0, 0.0, (), 0, 0))
    parts = []
    for t in terms:
        if isinstance(t.M_H, ClosedCurve) and t.M_H.dim == 2:
            parts.append(winding_number(t.M_H, t.piece, tol=min(tol, 1e-10), **quad))
        else:
            parts.append(degree_linking(t.M_H, t.piece, tol=tol, **quad))
    res = combine(parts, [t.sign for t in terms])
    if not all(p.certified for p in parts):
        return LinkingResult.from_raw(res.raw, res.quadrature, res.warnings + ("a reduced term is uncertified",))
    return res


# ---------------------------------------------------------------------------
# empirical homotopy invariance


@dataclass(frozen=True)
class HomotopyReport:
    lams: tuple[float, ...]
    results: tuple[LinkingResult, ...]
    passed: bool
    note: str = "scenes are assumed to already be in reduced position; homotopies are not constructed"

    @property
    def values(self) -> list[int]:
        return [r.rounded for r in self.results]


def compute_method(scene, pair, method: str, tol: float = 1e-8, **opts) -> LinkingResult:
    a, b = scene[pair[0]], scene[pair[1]]
    if method == "gauss":
        return gauss_linking_r3(a, b, tol=tol, **{k: v for k, v in opts.items() if k in ("max_nodes", "start_nodes")})
    if method == "degree":
        return degree_linking(a, b, tol=tol, **{k: v for k, v in opts.items() if k in ("max_nodes", "start_nodes")})
    if method == "reduce":
        return reduced_linking(a, b, tol=tol, **opts)
    raise InputError(f"unknown method {method!r}")


def homotopy_invariance_check(
    family: Callable[[float], object],
    samples: int = 10,
    tol: float = 1e-8,
    pair: tuple[str, str] | None = None,
    method: str | Callable = "gauss",
) -> HomotopyReport:
    """Linking values along ``lam -> family(lam)`` at ``samples`` equally spaced ``lam``."""
    if samples < 2:
        raise InputError("need at least two samples")
    lams = tuple(float(x) for x in np.linspace(0.0, 1.0, samples))
    results = []
    for lam in lams:
        try:
            scene = family(lam)
            p = pair or tuple(scene.names()[:2])
            if callable(method):
                res = method(scene, p)
            else:
                res = compute_method(scene, p, method, tol=tol)
        except DisjointnessViolation as exc:
            raise DisjointnessViolation(f"at lambda={lam:.6g}: {exc}", exc.distance, lam) from None
        results.append(res)
    passed = len({r.rounded for r in results}) == 1 and all(r.certified for r in results)
    return HomotopyReport(lams, tuple(results), passed)
