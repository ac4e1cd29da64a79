"""Builtin object families, builtin scenes and the scene JSON format.

Object families and their flat parameter lists:

``circle``      ``[d, i, j, radius, turns, c_1..c_d]``
    ``c + radius (cos 2 pi turns t e_i + sin 2 pi turns t e_j)``
``sphere``      ``[d, pole, a, b, radius, c_1..c_d]``
    ``c + radius (cos pi u e_pole + sin pi u (cos 2 pi v e_a + sin 2 pi v e_b))``
``torus``       ``[d, i, j, k, R, r, c_1..c_d]``
    ``c + (R + r cos 2 pi u)(cos 2 pi v e_i + sin 2 pi v e_j) + r sin 2 pi u e_k``
``torus_curve`` ``[p, q, R, r, phase]`` in R^3
    longitude ``2 pi p t``, meridian ``2 pi q t + phase`` on the standard torus
``fourier``     ``[d, K, a_0 (d), a_1 (d), b_1 (d), ..., a_K (d), b_K (d)]``
    ``a_0 + sum_k a_k cos 2 pi k t + b_k sin 2 pi k t``

Axis indices are 0-based.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InputError, UnknownFamily
from .geometry import ClosedCurve, Expected, PatchManifold, Scene, sampled_curve

TWO_PI = 2.0 * math.pi

BUILTIN_SCENES = ("unlink_r3", "hopf_r3", "torus_link_r3", "spun_pair_r4", "separated_pair_r4")


def _axis(d: int, k) -> np.ndarray:
    k = int(k)
    if not 0 <= k < d:
        raise InputError(f"axis index {k} outside 0..{d - 1}")
    e = np.zeros(d)
    e[k] = 1.0
    return e


def _dim(value) -> int:
    d = int(value)
    if d != value or d < 2:
        raise InputError(f"ambient dimension must be an integer >= 2, got {value}")
    return d


def _need(params, count, family):
    if len(params) != count:
        raise InputError(f"family {family!r} takes {count} parameters, got {len(params)}")


def circle(d, i, j, radius, turns=1, center=None) -> ClosedCurve:
    d = _dim(d)
    ei, ej = _axis(d, i), _axis(d, j)
    if int(i) == int(j):
        raise InputError("circle needs two distinct axes")
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    w = TWO_PI * turns
    params = [d, int(i), int(j), float(radius), turns, *c.tolist()]

    def pts(t):
        a = w * t[:, None]
        return c + radius * (np.cos(a) * ei + np.sin(a) * ej)

    def der(t):
        a = w * t[:, None]
        return radius * w * (-np.sin(a) * ei + np.cos(a) * ej)

    return ClosedCurve(d, pts, der, {"kind": "builtin", "family": "circle", "params": params})


def sphere(d, pole, a, b, radius, center=None) -> PatchManifold:
    d = _dim(d)
    ep, ea, eb = _axis(d, pole), _axis(d, a), _axis(d, b)
    if len({int(pole), int(a), int(b)}) != 3:
        raise InputError("sphere needs three distinct axes")
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    params = [d, int(pole), int(a), int(b), float(radius), *c.tolist()]

    def pts(U):
        th = math.pi * U[:, :1]
        ph = TWO_PI * U[:, 1:2]
        return c + radius * (np.cos(th) * ep + np.sin(th) * (np.cos(ph) * ea + np.sin(ph) * eb))

    def jac(U):
        th = math.pi * U[:, :1]
        ph = TWO_PI * U[:, 1:2]
        du = radius * math.pi * (-np.sin(th) * ep + np.cos(th) * (np.cos(ph) * ea + np.sin(ph) * eb))
        dv = radius * TWO_PI * np.sin(th) * (-np.sin(ph) * ea + np.cos(ph) * eb)
        return np.stack([du, dv], axis=2)

    return PatchManifold(
        2, d, (False, True), pts, jac,
        {"kind": "builtin", "family": "sphere", "params": params},
        ("poles at u=0 and u=1 collapse to points", ""),
    )


def torus(d, i, j, k, R, r, center=None) -> PatchManifold:
    d = _dim(d)
    ei, ej, ek = _axis(d, i), _axis(d, j), _axis(d, k)
    if len({int(i), int(j), int(k)}) != 3:
        raise InputError("torus needs three distinct axes")
    if not 0 < r < R:
        raise InputError("torus needs 0 < r < R")
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    params = [d, int(i), int(j), int(k), float(R), float(r), *c.tolist()]

    def pts(U):
        u = TWO_PI * U[:, :1]
        v = TWO_PI * U[:, 1:2]
        rad = R + r * np.cos(u)
        return c + rad * (np.cos(v) * ei + np.sin(v) * ej) + r * np.sin(u) * ek

    def jac(U):
        u = TWO_PI * U[:, :1]
        v = TWO_PI * U[:, 1:2]
        rad = R + r * np.cos(u)
        du = TWO_PI * (-r * np.sin(u) * (np.cos(v) * ei + np.sin(v) * ej) + r * np.cos(u) * ek)
        dv = TWO_PI * rad * (-np.sin(v) * ei + np.cos(v) * ej)
        return np.stack([du, dv], axis=2)

    return PatchManifold(
        2, d, (True, True), pts, jac, {"kind": "builtin", "family": "torus", "params": params}
    )


def torus_curve(p, q, R=2.0, r=1.0, phase=0.0) -> ClosedCurve:
    if not 0 < r < R:
        raise InputError("torus_curve needs 0 < r < R")
    params = [p, q, float(R), float(r), float(phase)]
    wp, wq = TWO_PI * p, TWO_PI * q

    def pts(t):
        phi = wp * t
        th = wq * t + phase
        rad = R + r * np.cos(th)
        return np.stack([rad * np.cos(phi), rad * np.sin(phi), r * np.sin(th)], axis=1)

    def der(t):
        phi = wp * t
        th = wq * t + phase
        rad = R + r * np.cos(th)
        drad = -r * wq * np.sin(th)
        return np.stack(
            [drad * np.cos(phi) - rad * wp * np.sin(phi),
             drad * np.sin(phi) + rad * wp * np.cos(phi),
             r * wq * np.cos(th)],
            axis=1,
        )

    return ClosedCurve(3, pts, der, {"kind": "builtin", "family": "torus_curve", "params": params})


def fourier(d, K, coeffs) -> ClosedCurve:
    d = _dim(d)
    K = int(K)
    C = np.asarray(coeffs, dtype=float)
    if K < 1 or C.size != (2 * K + 1) * d:
        raise InputError(f"fourier with d={d}, K={K} needs {(2 * K + 1) * d} coefficients")
    a0 = C[:d]
    ab = C[d:].reshape(K, 2, d)
    ks = np.arange(1, K + 1)
    params = [d, K, *C.tolist()]

    def pts(t):
        ang = TWO_PI * t[:, None] * ks
        return a0 + np.cos(ang) @ ab[:, 0] + np.sin(ang) @ ab[:, 1]

    def der(t):
        ang = TWO_PI * t[:, None] * ks
        return (-np.sin(ang) * TWO_PI * ks) @ ab[:, 0] + (np.cos(ang) * TWO_PI * ks) @ ab[:, 1]

    return ClosedCurve(d, pts, der, {"kind": "builtin", "family": "fourier", "params": params})


def make_object(family: str, params):
    params = [float(x) for x in params]
    if family == "circle":
        if len(params) < 5:
            raise InputError("circle takes [d, i, j, radius, turns, c_1..c_d]")
        d = _dim(params[0])
        _need(params, 5 + d, family)
        return circle(d, params[1], params[2], params[3], params[4], params[5:])
    if family == "sphere":
        if len(params) < 5:
            raise InputError("sphere takes [d, pole, a, b, radius, c_1..c_d]")
        d = _dim(params[0])
        _need(params, 5 + d, family)
        return sphere(d, params[1], params[2], params[3], params[4], params[5:])
    if family == "torus":
        if len(params) < 6:
            raise InputError("torus takes [d, i, j, k, R, r, c_1..c_d]")
        d = _dim(params[0])
        _need(params, 6 + d, family)
        return torus(d, *params[1:6], params[6:])
    if family == "torus_curve":
        _need(params, 5, family)
        return torus_curve(*params)
    if family == "fourier":
        if len(params) < 2:
            raise InputError("fourier takes [d, K, coefficients...]")
        return fourier(params[0], params[1], params[2:])
    raise UnknownFamily(f"unknown object family {family!r}")


def builtin_scene(name: str, params=()) -> Scene:
    params = list(params)
    if name == "hopf_r3":
        objs = {"g1": circle(3, 0, 1, 1.0), "g2": circle(3, 0, 2, 1.0, center=[1, 0, 0])}
        exp = [Expected(("g1", "g2"), -1, "crossing-sign oracle, 256-vertex polylines")]
        return Scene(objs, 3, tuple(exp), "hopf_r3")
    if name == "unlink_r3":
        objs = {"g1": circle(3, 0, 1, 1.0), "g2": circle(3, 0, 2, 1.0, center=[3, 0, 0])}
        exp = [Expected(("g1", "g2"), 0, "separated by the plane x1=1.5")]
        return Scene(objs, 3, tuple(exp), "unlink_r3")
    if name == "torus_link_r3":
        a, b = (int(x) for x in (params or [2, 4]))
        return _torus_link(a, b)
    if name == "spun_pair_r4":
        objs = {"M": circle(4, 0, 3, 1.0, center=[1, 0, 0, 0]), "N": sphere(4, 1, 0, 2, 1.0)}
        exp = [Expected(("M", "N"), -1, "slice by x2=0 reduces to the Hopf pair; crossing-sign oracle")]
        return Scene(objs, 4, tuple(exp), "spun_pair_r4")
    if name == "separated_pair_r4":
        objs = {"M": circle(4, 0, 3, 1.0, center=[4, 0, 0, 0]), "N": sphere(4, 1, 0, 2, 1.0)}
        exp = [Expected(("M", "N"), 0, "separated by the hyperplane x1=2.5")]
        return Scene(objs, 4, tuple(exp), "separated_pair_r4")
    raise UnknownFamily(f"unknown builtin scene {name!r}; choose from {', '.join(BUILTIN_SCENES)}")


def _torus_link(a: int, b: int) -> Scene:
    if a < 1 or b < 1:
        raise InputError("torus link parameters must be positive")
    g = math.gcd(a, b)
    if g < 2:
        raise InputError(f"T({a},{b}) is a knot, not a link")
    R, r = 2.0, 1.0
    label = f"torus_link_r3({a},{b})"
    if a == 2:
        # T(2, 2k) authored with one component flattened onto the core circle
        k = b // 2
        objs = {"k1": circle(3, 0, 1, R), "k2": torus_curve(1, k, R, r)}
        exp = [Expected(("k1", "k2"), -k, "crossing-sign oracle, 256-vertex polylines")]
        return Scene(objs, 3, tuple(exp), label)
    p, q = a // g, b // g
    objs = {f"k{j + 1}": torus_curve(p, q, R, r, TWO_PI * j / a) for j in range(g)}
    return Scene(objs, 3, (), label)


def random_planar_scene(seed: int, min_gap: float = 0.15, attempts: int = 200) -> Scene:
    """Seeded R^3 scene whose first curve lies in ``x3 = 0``.

    ``g1`` is a perturbed circle in the plane, ``g2`` a random trigonometric
    curve with a vertical wobble so that it pierces the plane. Draws closer
    than ``min_gap`` are rejected and redrawn from the same generator.
    """
    from .geometry import min_distance
    from .errors import DisjointnessViolation

    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        r = rng.uniform(0.8, 1.5)
        c1 = np.zeros((5, 3))
        c1[1] = [r, 0.0, 0.0]
        c1[2] = [0.0, r, 0.0]
        c1[3:, :2] = rng.normal(scale=0.15 * r, size=(2, 2))
        c2 = rng.normal(scale=0.6, size=(5, 3))
        c2[0] = [rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.normal(scale=0.2)]
        c2[1, 2] += rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0)
        objs = {"g1": fourier(3, 2, c1.ravel()), "g2": fourier(3, 2, c2.ravel())}
        try:
            scene = Scene(objs, 3, (), f"random_planar_{seed}")
        except DisjointnessViolation:
            continue
        if min_distance(objs["g1"], objs["g2"]) >= min_gap:
            return scene
    raise InputError(f"no admissible scene after {attempts} draws (seed {seed})")


def parse_builtin_ref(ref: str) -> Scene:
    """``builtin:NAME`` or ``builtin:NAME:p1,p2``."""
    body = ref.split(":", 1)[1]
    name, _, rest = body.partition(":")
    params = [float(x) for x in rest.split(",") if x.strip()] if rest else []
    return builtin_scene(name, params)


# ---------------------------------------------------------------------------
# JSON scene files


def scene_schema() -> dict:
    return json.loads(resources.files("linkproj").joinpath("scene.schema.json").read_text())


def _validate(doc, where: str):
    import jsonschema

    validator = jsonschema.Draft202012Validator(scene_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise InputError(f"{where}: field {path}: {err.message}")


def scene_from_dict(doc: dict, where: str = "scene", check: bool = True) -> Scene:
    _validate(doc, where)
    d = doc["ambient_dim"]
    objects = {}
    for i, entry in enumerate(doc["objects"]):
        name = entry["name"]
        if name in objects:
            raise InputError(f"{where}: field objects/{i}/name: duplicate object name {name!r}")
        try:
            if entry["kind"] == "builtin":
                if "family" not in entry or "params" not in entry:
                    raise InputError("builtin objects need 'family' and 'params'")
                obj = make_object(entry["family"], entry["params"])
            else:
                if "vertices" not in entry:
                    raise InputError("sample objects need 'vertices'")
                obj = sampled_curve(entry["vertices"])
        except InputError as exc:
            raise InputError(f"{where}: field objects/{i}: {exc}") from None
        objects[name] = obj
    expected = tuple(
        Expected(tuple(e["pair"]), int(e["value"]), e.get("provenance", ""))
        for e in doc.get("expected", [])
    )
    return Scene(objects, d, expected, doc.get("name", ""), check=check)


def load_scene(path, check: bool = True) -> Scene:
    path = str(path)
    if path.startswith("builtin:"):
        return parse_builtin_ref(path)
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read scene file {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    scene = scene_from_dict(doc, where=path, check=check)
    if not scene.name:
        scene = Scene(scene.objects, scene.ambient_dim, scene.expected, p.stem, check=False)
    return scene


def scene_to_dict(scene: Scene, vertices: int = 256) -> dict:
    """Serialise; builtins keep their family, everything else is sampled."""
    objs = []
    for name, obj in scene.objects.items():
        src = getattr(obj, "source", {})
        if src.get("kind") == "builtin" and not src.get("isometry") and not src.get("reversed"):
            objs.append({"name": name, "kind": "builtin", "family": src["family"], "params": src["params"]})
        elif src.get("kind") == "samples" and not src.get("isometry"):
            objs.append({"name": name, "kind": "samples", "vertices": src["vertices"]})
        elif isinstance(obj, ClosedCurve):
            t = np.arange(vertices) / vertices
            objs.append({"name": name, "kind": "samples", "vertices": obj.eval(t).tolist()})
        else:
            raise InputError(f"object {name!r} cannot be written to a scene file")
    doc = {"ambient_dim": scene.ambient_dim, "objects": objs}
    if scene.name:
        doc["name"] = scene.name
    if scene.expected:
        doc["expected"] = [
            {"pair": list(e.pair), "value": e.value, "provenance": e.provenance} for e in scene.expected
        ]
    return doc


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n")
