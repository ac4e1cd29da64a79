import numpy as np
import pytest

from linkproj import (
    ClosedCurve,
    Hyperplane,
    Isometry,
    Polyline,
    Scene,
    apply_isometry,
    builtin_scene,
    min_distance,
    point_manifold,
    sample_polyline,
    sampled_curve,
)
from linkproj.errors import DimensionMismatch, DisjointnessViolation, ImmersionFailure, InputError
from linkproj.geometry import as_manifold, check_disjoint
from linkproj.scenes import circle, sphere, torus


def test_curve_wraps_parameter():
    c = circle(3, 0, 1, 2.0)
    assert np.allclose(c.eval(1.25), c.eval(0.25))
    assert np.allclose(c.eval(-0.75), c.eval(0.25))
    assert np.allclose(c.eval(0.25), [0.0, 2.0, 0.0])


def test_finite_difference_tangent_matches_analytic():
    c = circle(3, 0, 2, 1.5, center=[1, 2, 3])
    fd = ClosedCurve(3, c.point_fn)
    t = np.linspace(0, 1, 7)
    assert np.allclose(fd.tangent(t), c.tangent(t), atol=1e-6)


def test_stalled_curve_is_not_an_immersion():
    c = ClosedCurve(2, lambda t: np.stack([np.cos(2 * np.pi * t) ** 3, np.sin(2 * np.pi * t) ** 3], axis=1))
    with pytest.raises(ImmersionFailure):
        c.tangent(np.array([0.0]))


def test_reversed_and_transformed():
    c = circle(3, 0, 1, 1.0)
    r = c.reversed()
    assert np.allclose(r.eval(0.1), c.eval(0.9))
    R = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    moved = c.transformed(R, [0, 0, 5])
    assert np.allclose(moved.eval(0.0), [0.0, 1.0, 5.0])
    assert np.allclose(moved.tangent(np.array([0.0]))[0], R @ c.tangent(np.array([0.0]))[0])


def test_sampled_curve_interpolates_vertices():
    t = np.arange(16) / 16
    pts = np.stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)], axis=1)
    c = sampled_curve(pts)
    assert np.allclose(c.eval(0.0), pts[0])
    assert abs(np.linalg.norm(c.eval(0.03)) - 1) < 1e-3
    with pytest.raises(InputError):
        sampled_curve(pts[:3])
    with pytest.raises(InputError):
        sampled_curve(np.vstack([pts, pts[:1]]))


def test_polyline_validation_and_sampling():
    with pytest.raises(InputError):
        Polyline(np.zeros((2, 3)))
    p = sample_polyline(circle(2, 0, 1, 1.0), 8)
    assert p.vertices.shape == (8, 2)
    with pytest.raises(InputError):
        sample_polyline(circle(2, 0, 1, 1.0), 4)


def test_sphere_and_torus_charts():
    s = sphere(3, 2, 0, 1, 2.0)
    U = np.random.default_rng(0).uniform(size=(50, 2))
    assert np.allclose(np.linalg.norm(s.evaluate(U), axis=1), 2.0)
    assert s.periodic == (False, True)
    t = torus(3, 0, 1, 2, 2.0, 0.5)
    P = t.evaluate(U)
    rho = np.hypot(P[:, 0], P[:, 1])
    assert np.allclose((rho - 2.0) ** 2 + P[:, 2] ** 2, 0.25)
    # analytic Jacobian against central differences
    J = t.jacobian(U[:3])
    h = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (t.evaluate(U[:3] + e) - t.evaluate(U[:3] - e)) / (2 * h)
        assert np.allclose(J[:, :, k], fd, atol=1e-5)


def test_point_manifold():
    p = point_manifold([1.0, 2.0, 3.0])
    assert p.intrinsic_dim == 0 and p.ambient_dim == 3
    assert np.allclose(p.evaluate(np.zeros((1, 0))), [[1, 2, 3]])
    assert as_manifold(np.array([0.0, 1.0])).ambient_dim == 2


def test_hyperplane():
    h = Hyperplane.axis(2, 1.5)
    assert h.codim == 1 and h.free_coords(4) == [0, 1, 3]
    assert np.allclose(h.project([[1, 2, 3, 4]]), [[1, 2, 4]])
    assert str(h) == "x3=1.5"
    assert h.contains(circle(3, 0, 1, 1.0, center=[0, 0, 1.5]))
    assert not h.contains(circle(3, 0, 2, 1.0, center=[0, 0, 1.5]))
    with pytest.raises(InputError):
        Hyperplane((1, 1), (0.0, 0.0))


def test_restriction_drops_fixed_coordinate():
    c = circle(3, 0, 1, 1.0, center=[0, 0, 2])
    r = c.restricted(Hyperplane.axis(2, 2.0))
    assert r.dim == 2 and np.allclose(r.eval(0.25), [0, 1])
    with pytest.raises(InputError):
        c.restricted(Hyperplane.axis(0, 0.0))


def test_isometry_validation_and_random():
    rng = np.random.default_rng(1)
    g = Isometry.random(4, rng, 1.0, fixed_axes=(1,))
    assert np.allclose(g.rotation[:, 1], [0, 1, 0, 0]) and g.translation[1] == 0.0
    assert np.linalg.det(g.rotation) == pytest.approx(1.0)
    with pytest.raises(InputError):
        Isometry(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(InputError):
        Isometry(2 * np.eye(3), np.zeros(3))


def test_min_distance_known_values():
    a = circle(3, 0, 1, 1.0)
    b = circle(3, 0, 2, 1.0, center=[3, 0, 0])
    assert min_distance(a, b) == pytest.approx(1.0, abs=1e-9)
    s = sphere(3, 2, 0, 1, 1.0)
    assert min_distance(s, point_manifold([0.3, 0.4, 2.0])) == pytest.approx(np.sqrt(0.25 + 4) - 1, abs=1e-9)


def test_scene_rejects_touching_objects():
    a = circle(3, 0, 1, 1.0)
    b = circle(3, 0, 2, 1.0, center=[2, 0, 0])  # meets a at (1, 0, 0)
    with pytest.raises(DisjointnessViolation):
        Scene({"a": a, "b": b}, 3)
    with pytest.raises(DisjointnessViolation):
        check_disjoint(a, a)


def test_scene_dimension_and_lookup():
    with pytest.raises(DimensionMismatch):
        Scene({"a": circle(3, 0, 1, 1.0), "b": circle(2, 0, 1, 1.0)}, 3)
    s = builtin_scene("hopf_r3")
    assert s.pairs() == [("g1", "g2")]
    assert s.expected_for(("g1", "g2")).value == -1
    assert s.expected_for(("g2", "g1")) is None
    with pytest.raises(InputError):
        s["nope"]


def test_apply_isometry_keeps_expected():
    s = builtin_scene("hopf_r3")
    g = Isometry.random(3, np.random.default_rng(3), 5.0)
    moved = apply_isometry(s, g)
    assert moved.expected == s.expected
    assert np.allclose(moved["g1"].eval(0.2), g.apply(s["g1"].eval(0.2)))
