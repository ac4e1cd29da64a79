import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkproj import (
    builtin_scene,
    degree_linking,
    gauss_linking_r3,
    linking_integral,
    point_manifold,
    sphere_volume,
    swap_sign,
    winding_number,
)
from linkproj.errors import DimensionMismatch, DisjointnessViolation, PointOnCurve, ToleranceNotReached
from linkproj.invariants import LinkingResult, combine
from linkproj.scenes import circle, sphere, torus_curve


def test_sphere_volumes():
    assert sphere_volume(0) == 2.0
    assert sphere_volume(1) == pytest.approx(2 * math.pi)
    assert sphere_volume(2) == pytest.approx(4 * math.pi)
    assert sphere_volume(3) == pytest.approx(2 * math.pi**2)
    # recursion vol S^p = 2 pi / (p - 1) vol S^(p-2)
    for p in range(2, 12):
        assert sphere_volume(p) == pytest.approx(2 * math.pi / (p - 1) * sphere_volume(p - 2), rel=1e-14)


def test_linking_result_certification():
    r = LinkingResult.from_raw(-0.9999)
    assert r.rounded == -1 and r.certified
    u = LinkingResult.from_raw(0.4)
    assert not u.certified and any("uncertified" in w for w in u.warnings)
    total = combine([LinkingResult.from_raw(1.0), LinkingResult.from_raw(1.0)], [1, -1])
    assert total.rounded == 0


def test_gauss_hopf_and_unlink():
    s = builtin_scene("hopf_r3")
    r = gauss_linking_r3(s["g1"], s["g2"])
    assert r.rounded == -1 and abs(r.raw + 1) < 1e-8
    u = builtin_scene("unlink_r3")
    assert abs(gauss_linking_r3(u["g1"], u["g2"]).raw) < 1e-8


def test_gauss_antisymmetry_under_reversal_and_swap():
    s = builtin_scene("hopf_r3")
    a, b = s["g1"], s["g2"]
    base = gauss_linking_r3(a, b).raw
    assert gauss_linking_r3(b, a).raw == pytest.approx(base, abs=1e-8)
    assert gauss_linking_r3(a.reversed(), b).raw == pytest.approx(-base, abs=1e-8)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_gauss_torus_links(k):
    core = circle(3, 0, 1, 2.0)
    r = gauss_linking_r3(core, torus_curve(1, k, 2.0, 1.0))
    assert r.rounded == -k and r.residual < 1e-8


def test_degree_equals_gauss_for_curves():
    s = builtin_scene("torus_link_r3")
    g = gauss_linking_r3(s["k1"], s["k2"])
    d = degree_linking(s["k1"], s["k2"])
    assert g.raw == pytest.approx(d.raw, abs=1e-12)


def test_degree_r4_pairs_and_swap_rule():
    s = builtin_scene("spun_pair_r4")
    mn = degree_linking(s["M"], s["N"], tol=1e-6)
    nm = degree_linking(s["N"], s["M"], tol=1e-6)
    assert mn.rounded == -1
    assert nm.raw == pytest.approx(swap_sign(2, 1) * mn.raw, abs=1e-8)
    assert degree_linking(*builtin_scene("separated_pair_r4").objects.values(), tol=1e-6).rounded == 0


def test_swap_sign_parity():
    assert swap_sign(1, 1) == 1
    assert swap_sign(1, 2) == -1
    assert swap_sign(0, 2) == -1
    assert swap_sign(2, 2) == -1 and swap_sign(1, 3) == 1


def test_degree_curve_and_point_is_winding_in_plane():
    c = circle(2, 0, 1, 1.0, turns=2)
    w = winding_number(c, [0.1, 0.2])
    d = degree_linking(c, point_manifold([0.1, 0.2]))
    assert w.rounded == 2 and d.raw == pytest.approx(w.raw, abs=1e-8)


def test_degree_sphere_around_point_in_r3():
    s = sphere(3, 2, 0, 1, 1.0)
    inside = degree_linking(s, point_manifold([0.1, -0.2, 0.3]), tol=1e-6)
    outside = degree_linking(s, point_manifold([3.0, 0.0, 0.0]), tol=1e-6)
    assert abs(inside.rounded) == 1 and outside.rounded == 0


def test_winding_errors():
    c = circle(2, 0, 1, 1.0)
    with pytest.raises(PointOnCurve):
        winding_number(c, [1.0, 0.0])
    with pytest.raises(DimensionMismatch):
        winding_number(circle(3, 0, 1, 1.0), [0.0, 0.0])


@settings(max_examples=25, deadline=None)
@given(
    st.integers(-3, 3).filter(lambda t: t != 0),
    st.floats(0.3, 2.0),
    st.floats(-0.25, 0.25),
    st.floats(-0.25, 0.25),
)
def test_winding_of_multiple_circle(turns, radius, x, y):
    c = circle(2, 0, 1, radius, turns=turns)
    q = np.array([x, y]) * radius
    assert winding_number(c, q).rounded == turns
    assert winding_number(c, [3 * radius, 0.0]).rounded == 0


def test_linking_integral_reports_min_distance():
    s = builtin_scene("unlink_r3")
    _, dmin = linking_integral(s["g1"], s["g2"], [32], [32])
    assert dmin == pytest.approx(1.0, abs=1e-2)


def test_touching_curves_rejected():
    a = circle(3, 0, 1, 1.0)
    b = circle(3, 0, 2, 1.0, center=[2, 0, 0])
    with pytest.raises(DisjointnessViolation):
        gauss_linking_r3(a, b)


def test_tolerance_failure_carries_best_value():
    # nearly touching circles need many nodes
    a = circle(3, 0, 1, 1.0)
    b = circle(3, 0, 2, 1.0, center=[1.999, 0, 0])
    with pytest.raises(ToleranceNotReached) as info:
        gauss_linking_r3(a, b, max_nodes=32)
    assert info.value.result is not None
    assert info.value.result.quadrature.nodes_per_dim == (32, 32)
