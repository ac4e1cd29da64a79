import math

import numpy as np
import pytest

from linkproj import (
    Polyline,
    builtin_scene,
    crossing_sign_linking,
    gamma_identity_lhs,
    gamma_identity_rhs,
    iterated_tail_identity,
    raycast_winding,
    sample_polyline,
    sphere_volume,
)
from linkproj.errors import InputError, NonGenericProjection, PointOnBoundary
from linkproj.oracles import crossing_linking_curves, gamma_identity_forms, list_crossings
from linkproj.scenes import circle

SQUARE = Polyline(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))


def test_raycast_square():
    assert raycast_winding(SQUARE, [0.0, 0.0]) == 1
    assert raycast_winding(SQUARE, [5.0, 0.0]) == 0
    assert raycast_winding(Polyline(SQUARE.vertices[::-1]), [0.0, 0.0]) == -1


def test_raycast_half_open_vertex_rule():
    # the ray from (0, 1) passes exactly through the vertex (1, 1)
    diamond = Polyline(np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 2.0], [-1.0, 1.0]]))
    assert raycast_winding(diamond, [0.0, 1.0]) == 1
    assert raycast_winding(diamond, [-2.0, 1.0]) == 0


def test_raycast_double_circle():
    p = sample_polyline(circle(2, 0, 1, 1.0, turns=2), 256)
    assert raycast_winding(p, [0.0, 0.0]) == 2


def test_raycast_on_boundary():
    with pytest.raises(PointOnBoundary):
        raycast_winding(SQUARE, [1.0, 0.3])


@pytest.mark.parametrize("name,pair,value", [
    ("hopf_r3", ("g1", "g2"), -1),
    ("unlink_r3", ("g1", "g2"), 0),
    ("torus_link_r3", ("k1", "k2"), -2),
])
def test_crossings_on_builtins(name, pair, value):
    s = builtin_scene(name)
    v, _ = crossing_linking_curves(s[pair[0]], s[pair[1]])
    assert v == value


def test_crossing_list_consistent_with_count():
    s = builtin_scene("hopf_r3")
    p1, p2 = sample_polyline(s["g1"], 64), sample_polyline(s["g2"], 64)
    d = (0.0123, 0.0271, 1.0)
    xs = list_crossings(p1, p2, d)
    assert len(xs) == 2 and sum(x.sign for x in xs) // 2 == crossing_sign_linking(p1, p2, d)
    assert {x.over for x in xs} <= {1, 2}


def test_degenerate_direction_rejected():
    # looking along x1, the two coplanar xz/xy circles project onto overlapping segments
    s = builtin_scene("hopf_r3")
    p1, p2 = sample_polyline(s["g1"], 64), sample_polyline(s["g2"], 64)
    with pytest.raises(NonGenericProjection):
        crossing_sign_linking(p1, p2, (0.0, 1.0, 0.0))
    with pytest.raises(InputError):
        crossing_sign_linking(p1, p2, (0.0, 0.0, 0.0))


def test_gamma_table_values():
    assert gamma_identity_lhs(1, 1.0) == pytest.approx(math.pi, abs=1e-13)
    assert gamma_identity_lhs(3, 1.0) == pytest.approx(math.pi / 2, abs=1e-13)
    assert gamma_identity_rhs(2, 4.0) == pytest.approx(0.5, abs=1e-15)
    g, s = gamma_identity_forms(5, 1.0)
    assert g == pytest.approx(sphere_volume(5) / sphere_volume(4), rel=1e-14)
    with pytest.raises(InputError):
        gamma_identity_lhs(0, 1.0)
    with pytest.raises(InputError):
        gamma_identity_rhs(2, -1.0)


def test_tail_identity_examples_and_scaling():
    n, c = iterated_tail_identity(2, 1, 1.0)
    assert n == pytest.approx(2.0, abs=1e-12) and c == pytest.approx(2.0, abs=1e-15)
    n, c = iterated_tail_identity(3, 2, 1.0)
    assert c == pytest.approx(math.pi, abs=1e-14) and n == pytest.approx(math.pi, abs=1e-10)
    for p, k in ((3, 1), (4, 2)):
        _, c1 = iterated_tail_identity(p, k, 1.0)
        _, c2 = iterated_tail_identity(p, k, 2.0)
        assert c2 == pytest.approx(c1 * 2.0 ** (-(p - k + 1)), rel=1e-14)


def test_tail_identity_preconditions():
    with pytest.raises(InputError):
        iterated_tail_identity(3, 4, 1.0)
    with pytest.raises(InputError):
        iterated_tail_identity(2, 2, 1.0)
    with pytest.raises(InputError):
        iterated_tail_identity(3, 1, 0.0)
