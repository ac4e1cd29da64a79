"""Command line interface: ``linkproj {lk,verify,convergence,gamma}``.

Exit codes: 0 computed and agreeing, 1 input error, 2 disagreement or a
failed expectation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import (
    DisjointnessViolation,
    InputError,
    LinkingError,
    NonGenericProjection,
    NonTransverse,
    OpenContour,
    ToleranceNotReached,
)
from .geometry import ClosedCurve, Hyperplane, Scene, as_manifold
from .invariants import CERTIFY_EPS, LinkingResult, linking_integral
from .oracles import crossing_linking_curves, gamma_identity_forms, gamma_identity_lhs
from .reduction import compute_method, reduced_terms
from .scenes import BUILTIN_SCENES, load_scene

log = logging.getLogger("linkproj")

METHODS = ("gauss", "degree", "reduce", "crossings")
EXIT_OK, EXIT_INPUT, EXIT_DISAGREE = 0, 1, 2

HINTS = {
    ToleranceNotReached: "raise --max-nodes or loosen --tol",
    NonTransverse: "perturb the scene or choose another --hyperplane",
    OpenContour: "the slice reaches a chart boundary; choose another --hyperplane",
    NonGenericProjection: "try another --seed",
    DisjointnessViolation: "the objects touch; linking is undefined",
}


@dataclass
class MethodResult:
    method: str
    status: str  # ok | unconverged | skipped | error
    raw: float | None = None
    rounded: int | None = None
    residual: float | None = None
    nodes: list[int] = field(default_factory=list)
    evaluations: int = 0
    wall_ms: float = 0.0
    note: str = ""

    def machine(self) -> dict:
        out = {"method": self.method, "status": self.status}
        if self.raw is not None:
            out.update(raw=self.raw, rounded=self.rounded, residual=self.residual,
                       nodes=self.nodes, evaluations=self.evaluations)
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class PairReport:
    pair: tuple[str, str]
    methods: list[MethodResult]
    expected: int | None = None
    verdict: str = "FAIL"
    warnings: list[str] = field(default_factory=list)


@dataclass
class RunReport:
    scene: str
    pairs: list[PairReport]

    @property
    def verdict(self) -> str:
        return "PASS" if self.pairs and all(p.verdict == "PASS" for p in self.pairs) else "FAIL"

    def machine(self) -> dict:
        return {
            "scene": self.scene,
            "verdict": self.verdict,
            "pairs": [
                {
                    "pair": list(p.pair),
                    "verdict": p.verdict,
                    "expected": p.expected,
                    "methods": [m.machine() for m in p.methods],
                    "warnings": p.warnings,
                }
                for p in self.pairs
            ],
        }


def applicable(scene: Scene, pair, method: str) -> str | None:
    """``None`` when ``method`` applies to ``pair``, else the reason it does not."""
    a, b = as_manifold(scene[pair[0]]), as_manifold(scene[pair[1]])
    d = scene.ambient_dim
    curves = isinstance(a, ClosedCurve) and isinstance(b, ClosedCurve)
    if method in ("gauss", "crossings"):
        if d != 3 or not curves:
            return f"not applicable (d={d})" if d != 3 else "not applicable (needs two curves)"
        return None
    if d != a.intrinsic_dim + b.intrinsic_dim + 1:
        return f"not applicable (d={d} but m+n+1={a.intrinsic_dim + b.intrinsic_dim + 1})"
    return None


def run_method(scene: Scene, pair, method: str, opts) -> MethodResult:
    reason = applicable(scene, pair, method)
    if reason:
        return MethodResult(method, "skipped", note=reason)
    t0 = time.perf_counter()
    try:
        if method == "crossings":
            value, direction = crossing_linking_curves(scene[pair[0]], scene[pair[1]], seed=opts.seed)
            res = LinkingResult.from_raw(float(value))
            note = "direction " + ",".join(f"{x:.6g}" for x in direction)
        else:
            kwargs = {}
            if opts.max_nodes:
                kwargs["max_nodes"] = opts.max_nodes
            if method == "reduce":
                kwargs["grid"] = opts.grid
                if opts.hyperplane is not None:
                    kwargs["h"] = opts.hyperplane
            res = compute_method(scene, pair, method, tol=opts.tol, **kwargs)
            note = "; ".join(res.warnings)
        status = "ok"
    except ToleranceNotReached as exc:
        res = exc.result or LinkingResult.from_raw(exc.best)
        status, note = "unconverged", f"{exc} ({HINTS[ToleranceNotReached]})"
    except InputError as exc:
        if method == "reduce":
            return MethodResult(method, "skipped", note=f"not applicable ({exc})")
        raise
    except LinkingError as exc:
        hint = next((h for cls, h in HINTS.items() if isinstance(exc, cls)), "")
        return MethodResult(method, "error", note=f"{type(exc).__name__}: {exc}" + (f" ({hint})" if hint else ""),
                            wall_ms=1000 * (time.perf_counter() - t0))
    wall = 1000 * (time.perf_counter() - t0)
    q = res.quadrature
    return MethodResult(
        method, status, res.raw, res.rounded, res.residual,
        list(q.nodes_per_dim) if q else [], res.evaluations, wall, note,
    )


def evaluate_pair(scene: Scene, pair, methods, opts) -> PairReport:
    results = [run_method(scene, pair, m, opts) for m in methods]
    rep = PairReport(tuple(pair), results)
    exp = scene.expected_for(pair)
    rep.expected = exp.value if exp else None
    computed = [r for r in results if r.status in ("ok", "unconverged")]
    for r in results:
        if r.status in ("error", "unconverged"):
            rep.warnings.append(f"{r.method}: {r.note}")
        elif r.status == "ok" and r.residual is not None and r.residual >= CERTIFY_EPS:
            rep.warnings.append(f"{r.method}: uncertified (residual {r.residual:.3g})")
    values = {r.rounded for r in computed}
    ok = (
        bool(computed)
        and len(values) == 1
        and all(r.status == "ok" and r.residual < CERTIFY_EPS for r in computed)
        and not any(r.status == "error" for r in results)
    )
    if ok and exp is not None and exp.value not in values:
        rep.warnings.append(f"expected {exp.value} for {pair[0]},{pair[1]} but computed {values.pop()}")
        ok = False
    rep.verdict = "PASS" if ok else "FAIL"
    return rep


# ---------------------------------------------------------------------------
# output


def _fmt_method(m: MethodResult) -> str:
    if m.raw is None:
        return f"  {m.method:<10} {m.status}: {m.note}"
    nodes = "x".join(str(n) for n in m.nodes) or "-"
    line = (f"  {m.method:<10} raw={m.raw:+.12f}  lk={m.rounded:+d}  residual={m.residual:.2e}"
            f"  nodes={nodes}  evals={m.evaluations}  {m.wall_ms:.1f} ms")
    if m.status != "ok":
        line += f"  [{m.status}]"
    return line


def print_report(rep: RunReport, as_json: bool, out) -> None:
    if as_json:
        out.write(json.dumps(rep.machine(), sort_keys=True) + "\n")
        return
    out.write(f"scene {rep.scene}\n")
    for p in rep.pairs:
        exp = "" if p.expected is None else f"  (expected {p.expected:+d})"
        out.write(f" pair {p.pair[0]},{p.pair[1]}{exp}\n")
        for m in p.methods:
            out.write(_fmt_method(m) + "\n")
        for w in p.warnings:
            out.write(f"  warning: {w}\n")
        out.write(f"  verdict: {p.verdict}\n")
    out.write(f"verdict: {rep.verdict}\n")


# ---------------------------------------------------------------------------
# commands


def _pairs(scene: Scene, pair_arg: str | None):
    if not pair_arg:
        pairs = scene.pairs()
        if not pairs:
            raise InputError("scene needs at least two objects")
        return pairs
    names = [x.strip() for x in pair_arg.split(",")]
    if len(names) != 2:
        raise InputError("--pair takes two comma-separated object names")
    for n in names:
        scene[n]
    return [tuple(names)]


def cmd_lk(args, out) -> int:
    scene = load_scene(args.scene)
    methods = METHODS if args.method == "all" else (args.method,)
    rep = RunReport(scene.name or str(args.scene),
                    [evaluate_pair(scene, p, methods, args) for p in _pairs(scene, args.pair)])
    print_report(rep, args.json, out)
    return EXIT_OK if rep.verdict == "PASS" else EXIT_DISAGREE


def _expand_scenes(refs) -> list[str]:
    out = []
    for ref in refs:
        if ref == "builtin:suite":
            out += [f"builtin:{n}" for n in BUILTIN_SCENES]
            continue
        if not ref.startswith("builtin:") and ref.endswith(".json"):
            try:
                doc = json.loads(Path(ref).read_text())
            except (OSError, json.JSONDecodeError):
                doc = None
            if isinstance(doc, dict) and set(doc) == {"scenes"}:
                base = Path(ref).parent
                out += [s if s.startswith("builtin:") else str(base / s) for s in doc["scenes"]]
                continue
        out.append(ref)
    return out


def cmd_verify(args, out) -> int:
    reports = []
    for ref in _expand_scenes(args.scenes):
        scene = load_scene(ref)
        reports.append(RunReport(scene.name or ref,
                                 [evaluate_pair(scene, p, METHODS, args) for p in _pairs(scene, None)]))
    for rep in reports:
        print_report(rep, args.json, out)
    ok = all(r.verdict == "PASS" for r in reports)
    if not args.json:
        out.write(f"suite: {'PASS' if ok else 'FAIL'} ({sum(r.verdict == 'PASS' for r in reports)}/{len(reports)} scenes)\n")
    return EXIT_OK if ok else EXIT_DISAGREE


def fixed_node_value(scene: Scene, pair, method: str, n: int, grid: int = 512, hyperplane=None, _cache=None):
    """Linking value at ``n`` nodes per dimension, without refinement.

    Returns ``(value, integrand_evaluations)``.
    """
    a, b = as_manifold(scene[pair[0]]), as_manifold(scene[pair[1]])
    if method in ("gauss", "degree"):
        reason = applicable(scene, pair, method)
        if reason:
            raise InputError(f"{method}: {reason}")
        v, _ = linking_integral(a, b, [n] * a.intrinsic_dim, [n] * b.intrinsic_dim)
        return v, n ** (a.intrinsic_dim + b.intrinsic_dim)
    if method == "reduce":
        if _cache is not None and "terms" in _cache:
            terms = _cache["terms"]
        else:
            _, terms = reduced_terms(a, b, hyperplane, grid)
            if _cache is not None:
                _cache["terms"] = terms
        total, evals = 0.0, 0
        for t in terms:
            piece = as_manifold(t.piece)
            v, _ = linking_integral(t.M_H, piece, [n] * t.M_H.intrinsic_dim, [n] * piece.intrinsic_dim)
            total += t.sign * v
            evals += n ** (t.M_H.intrinsic_dim + piece.intrinsic_dim)
        return total, evals
    raise InputError(f"convergence study supports gauss, degree and reduce, not {method!r}")


def convergence_rows(scene: Scene, pair, method: str, schedule, grid: int = 512, hyperplane=None):
    if not schedule:
        raise InputError("empty node schedule")
    for prev, cur in zip(schedule, schedule[1:]):
        if cur != 2 * prev:
            raise InputError("schedule must be a doubling list, e.g. 16,32,64")
    if schedule[0] < 8:
        raise InputError("schedule must start at 8 nodes or more")
    cache: dict = {}
    rows = []
    cumulative = 0
    for n in schedule:
        t0 = time.perf_counter()
        value, evals = fixed_node_value(scene, pair, method, n, grid, hyperplane, cache)
        wall = 1000 * (time.perf_counter() - t0)
        cumulative += evals
        rows.append({"nodes": n, "value": value, "evaluations": evals,
                     "cumulative_evaluations": cumulative, "wall_ms": wall})
    final = rows[-1]["value"]
    for r in rows:
        r["abs_error_vs_final"] = abs(r["value"] - final)
    return rows


def evaluations_to_reach(rows, tol: float, target: float | None = None):
    """Cumulative evaluations at the first row within ``tol`` of ``target``.

    ``target`` defaults to the nearest integer of the final value.
    """
    if target is None:
        target = round(rows[-1]["value"])
    for r in rows:
        if abs(r["value"] - target) < tol:
            return r["cumulative_evaluations"], r["nodes"]
    return None, None


def cmd_convergence(args, out) -> int:
    scene = load_scene(args.scene)
    pair = _pairs(scene, args.pair)[0]
    try:
        schedule = [int(x) for x in args.schedule.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad --schedule {args.schedule!r}") from None
    rows = convergence_rows(scene, pair, args.method, schedule, args.grid, args.hyperplane)
    reached, at_nodes = evaluations_to_reach(rows, args.tol)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["nodes", "value", "abs_error_vs_final", "wall_ms"])
    for r in rows:
        writer.writerow([r["nodes"], repr(r["value"]), f"{r['abs_error_vs_final']:.6e}", f"{r['wall_ms']:.3f}"])
    if args.csv:
        Path(args.csv).write_text(buf.getvalue())

    if args.json:
        for r in rows:
            rec = {k: v for k, v in r.items() if k != "wall_ms"}
            out.write(json.dumps(rec, sort_keys=True) + "\n")
        out.write(json.dumps({"summary": {
            "scene": scene.name, "pair": list(pair), "method": args.method, "tol": args.tol,
            "evaluations_to_tol": reached, "nodes_at_tol": at_nodes,
            "total_evaluations": rows[-1]["cumulative_evaluations"],
        }}, sort_keys=True) + "\n")
    elif args.csv:
        out.write(f"{'nodes':>6} {'value':>22} {'abs_error_vs_final':>20} {'evaluations':>12}\n")
        for r in rows:
            out.write(f"{r['nodes']:>6} {r['value']:>22.15f} {r['abs_error_vs_final']:>20.3e} {r['evaluations']:>12}\n")
        out.write(f"evaluations to reach {args.tol:g}: {reached} (at {at_nodes} nodes)\n")
    else:
        out.write(buf.getvalue())
    return EXIT_OK


def _int_range(text: str) -> list[int]:
    vals = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part or "-" in part[1:]:
            lo, hi = part.replace("..", "-").split("-", 1)
            vals += list(range(int(lo), int(hi) + 1))
        else:
            vals.append(int(part))
    if not vals:
        raise InputError("empty range")
    return vals


def cmd_gamma(args, out) -> int:
    try:
        ps = _int_range(args.p)
        As = [float(x) for x in args.a.split(",") if x.strip()]
    except ValueError:
        raise InputError("bad --p or --a") from None
    if not As or any(not a > 0 for a in As):
        raise InputError("--a values must be positive")
    if any(p < 1 for p in ps):
        raise InputError("--p values must be >= 1")
    rows = []
    for p in ps:
        for a in As:
            lhs = gamma_identity_lhs(p, a)
            by_gamma, by_spheres = gamma_identity_forms(p, a)
            rows.append({"p": p, "a": a, "lhs": lhs, "rhs": by_gamma, "rhs_spheres": by_spheres,
                         "diff": abs(lhs - by_gamma)})
    if args.json:
        for r in rows:
            out.write(json.dumps(r, sort_keys=True) + "\n")
    else:
        out.write(f"{'p':>3} {'a':>8} {'lhs':>22} {'rhs':>22} {'|diff|':>10}\n")
        for r in rows:
            out.write(f"{r['p']:>3} {r['a']:>8g} {r['lhs']:>22.15f} {r['rhs']:>22.15f} {r['diff']:>10.2e}\n")
    return EXIT_OK


def _hyperplane(text: str) -> Hyperplane:
    try:
        k, v = text.split("=")
        k = k.strip().lower().lstrip("x")
        return Hyperplane.axis(int(k) - 1, float(v))
    except ValueError:
        raise argparse.ArgumentTypeError("use x<k>=<value>, e.g. x3=0 (1-based axis)") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linkproj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--max-nodes", type=int, default=None, help="per-dimension node cap")
        p.add_argument("--grid", type=int, default=512, help="slice mesh resolution")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true", help="line-delimited JSON output")
        p.add_argument("--hyperplane", type=_hyperplane, default=None, help="reduction plane, e.g. x3=0")

    p = sub.add_parser("lk", help="linking number of one or all pairs")
    p.add_argument("scene", help="scene file or builtin:NAME[:params]")
    p.add_argument("--pair")
    p.add_argument("--method", choices=METHODS + ("all",), default="all")
    common(p)
    p.set_defaults(func=cmd_lk)

    p = sub.add_parser("verify", help="run every applicable method on every pair")
    p.add_argument("scenes", nargs="+", help="scene files, manifests, builtin:NAME or builtin:suite")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("convergence", help="value against node count, as CSV")
    p.add_argument("scene")
    p.add_argument("--pair")
    p.add_argument("--method", choices=("gauss", "degree", "reduce"), default="gauss")
    p.add_argument("--schedule", default="16,32,64,128,256,512,1024")
    p.add_argument("--csv", default=None, help="write the CSV here instead of stdout")
    common(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("gamma", help="Gamma-function identity table")
    p.add_argument("--p", default="1-6")
    p.add_argument("--a", default="1")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gamma)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DisjointnessViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LinkingError as exc:
        hint = next((h for cls, h in HINTS.items() if isinstance(exc, cls)), "")
        print(f"error: {type(exc).__name__}: {exc}" + (f" ({hint})" if hint else ""), file=sys.stderr)
        return EXIT_DISAGREE


if __name__ == "__main__":
    sys.exit(main())
