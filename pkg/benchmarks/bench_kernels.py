"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5] [--json]

Each row checks that both backends agree before reporting timings.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from linkproj import _kernels, builtin_scene, sample_polyline
from linkproj.geometry import as_manifold
from linkproj.quadrature import tensor_rule


def _best(fn, repeat):
    fn()  # warm-up, includes jit compilation
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _pair_inputs(scene, pair, n):
    a, b = (as_manifold(scene[k]) for k in pair)
    Ua, _ = tensor_rule(a.periodic, [n] * a.intrinsic_dim)
    Ub, Wb = tensor_rule(b.periodic, [n] * b.intrinsic_dim)
    return a.evaluate(Ua), a.jacobian(Ua), b.evaluate(Ub), b.jacobian(Ub), Wb


def cases():
    hopf = builtin_scene("hopf_r3")
    spun = builtin_scene("spun_pair_r4")
    for n in (128, 512, 2048):
        yield f"pair_rows hopf {n}x{n}", "pair_rows", _pair_inputs(hopf, ("g1", "g2"), n)
    for n in (32, 64):
        yield f"pair_rows spun {n}^3", "pair_rows", _pair_inputs(spun, ("M", "N"), n)
    for v in (256, 1024):
        p1, p2 = (sample_polyline(hopf[k], v) for k in ("g1", "g2"))
        e3 = np.array([0.0123, 0.0271, 1.0])
        e3 /= np.linalg.norm(e3)
        e1 = np.cross([1.0, 0.0, 0.0], e3)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(e3, e1)
        args = (p1.vertices @ np.stack([e1, e2], 1), p1.vertices @ e3,
                p2.vertices @ np.stack([e1, e2], 1), p2.vertices @ e3)
        yield f"crossings hopf {v}-gons", "crossings", args
    t = np.arange(4096) / 4096
    V = np.stack([np.cos(2 * np.pi * t), np.sin(4 * np.pi * t) * 0.5 + np.sin(2 * np.pi * t)], 1)
    yield "raycast 4096-gon", "raycast", (V, np.array([0.1, 0.05]))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is disabled (LINKPROJ_DISABLE_NUMBA); nothing to compare")

    rows = []
    for label, kernel, inputs in cases():
        f_np = getattr(_kernels, f"{kernel}_numpy")
        f_nb = getattr(_kernels, f"{kernel}_numba")
        r_np, r_nb = f_np(*inputs), f_nb(*inputs)
        if kernel == "pair_rows":
            same = np.allclose(r_np[0], r_nb[0], rtol=1e-11, atol=1e-14)
        else:
            same = r_np == r_nb
        t_np = _best(lambda: f_np(*inputs), args.repeat)
        t_nb = _best(lambda: f_nb(*inputs), args.repeat)
        rows.append({"case": label, "numpy_ms": 1e3 * t_np, "numba_ms": 1e3 * t_nb,
                     "speedup": t_np / t_nb, "agree": bool(same)})

    if args.json:
        for r in rows:
            print(json.dumps(r))
        return
    print(f"{'case':<26} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}  agree")
    for r in rows:
        print(f"{r['case']:<26} {r['numpy_ms']:>10.2f} {r['numba_ms']:>10.2f} {r['speedup']:>8.1f}  {r['agree']}")


if __name__ == "__main__":
    main()
