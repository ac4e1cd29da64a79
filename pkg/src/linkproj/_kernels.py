"""Hot inner loops, in two interchangeable implementations.

Each kernel has a numba version (``*_numba``) and a vectorised numpy version
(``*_numpy``). The public name dispatches to numba unless the environment
variable ``LINKPROJ_DISABLE_NUMBA`` is set to a truthy value or numba cannot be
imported. Both versions return per-row partial sums so that the final reduction
happens in numpy in a fixed order, independent of the number of threads.

``LK_WORKERS`` caps the numba thread count.
"""

from __future__ import annotations

import math
import os
import warnings

import numpy as np

_FALSEY = {"", "0", "false", "no", "off"}


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in _FALSEY


USE_NUMBA = not _flag("LINKPROJ_DISABLE_NUMBA")

if USE_NUMBA:
    try:
        import numba
        from numba import njit, prange

        # numba probes TBB first and warns when the installed one is too old
        if "NUMBA_THREADING_LAYER" not in os.environ:
            numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
        warnings.filterwarnings("ignore", message="The TBB threading layer", module="numba")
    except ImportError:  # pragma: no cover - numba is a hard dependency in practice
        USE_NUMBA = False

HAVE_NUMBA = USE_NUMBA

# numpy chunking keeps the (chunk, ny, d, d) temporaries under ~32 MB
_NUMPY_BLOCK = 1 << 20

GENERIC_EPS = 1e-9


# ---------------------------------------------------------------------------
# pairwise determinant sums


def pair_rows_numpy(X, JX, Y, JY, wY):
    """Row sums ``sum_j wY[j] det(X_i - Y_j, JX_i, JY_j) / |X_i - Y_j|^d``.

    Returns ``(rows, min_distance)``.
    """
    nx, d = X.shape
    ny = Y.shape[0]
    m = JX.shape[2]
    n = JY.shape[2]
    rows = np.empty(nx)
    min_r2 = np.inf
    chunk = max(1, _NUMPY_BLOCK // max(1, ny * d * d))
    for start in range(0, nx, chunk):
        stop = min(nx, start + chunk)
        r = X[start:stop, None, :] - Y[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", r, r)
        if d == 3 and m + n == 2:
            a = JX[start:stop, :, 0] if m == 1 else None
            if m == 1 and n == 1:
                cr = np.cross(a[:, None, :], JY[None, :, :, 0])
            elif m == 2:
                cr = np.broadcast_to(
                    np.cross(JX[start:stop, :, 0], JX[start:stop, :, 1])[:, None, :], r.shape
                )
            else:
                cr = np.broadcast_to(np.cross(JY[:, :, 0], JY[:, :, 1])[None, :, :], r.shape)
            det = np.einsum("ijk,ijk->ij", r, cr)
        else:
            mat = np.empty((stop - start, ny, d, d))
            mat[..., 0] = r
            if m:
                mat[..., 1 : 1 + m] = JX[start:stop, None, :, :]
            if n:
                mat[..., 1 + m :] = JY[None, :, :, :]
            det = np.linalg.det(mat)
        rows[start:stop] = np.sum(wY[None, :] * det / r2 ** (0.5 * d), axis=1)
        min_r2 = min(min_r2, float(r2.min()))
    return rows, math.sqrt(min_r2)


# ---------------------------------------------------------------------------
# signed projected crossings between two closed polylines


def crossings_numpy(P, DP, Q, DQ):
    """Twice the linking number from projected crossings.

    ``P``/``Q`` are projected vertices (closed polylines, shape (k, 2)) and
    ``DP``/``DQ`` depths along the viewing direction. Returns
    ``(signed_sum, nongeneric_flag)``.
    """
    a0 = P
    a = np.roll(P, -1, axis=0) - P
    b0 = Q
    b = np.roll(Q, -1, axis=0) - Q
    da = np.roll(DP, -1) - DP
    db = np.roll(DQ, -1) - DQ

    la = np.hypot(a[:, 0], a[:, 1])
    lb = np.hypot(b[:, 0], b[:, 1])
    denom = a[:, None, 0] * b[None, :, 1] - a[:, None, 1] * b[None, :, 0]
    w = b0[None, :, :] - a0[:, None, :]
    num_s = w[..., 0] * b[None, :, 1] - w[..., 1] * b[None, :, 0]
    num_u = w[..., 0] * a[:, None, 1] - w[..., 1] * a[:, None, 0]

    lo_a = np.minimum(a0, a0 + a)
    hi_a = np.maximum(a0, a0 + a)
    lo_b = np.minimum(b0, b0 + b)
    hi_b = np.maximum(b0, b0 + b)
    near = np.all(
        (lo_a[:, None, :] <= hi_b[None, :, :] + GENERIC_EPS)
        & (lo_b[None, :, :] <= hi_a[:, None, :] + GENERIC_EPS),
        axis=2,
    )

    scale = la[:, None] * lb[None, :]
    parallel = near & (np.abs(denom) <= GENERIC_EPS * scale)
    safe = np.where(parallel | (denom == 0.0), 1.0, denom)
    s = num_s / safe
    u = num_u / safe
    # distances from the crossing to segment endpoints, in projected units
    ds = np.minimum(np.abs(s) * la[:, None], np.abs(1.0 - s) * la[:, None])
    du = np.minimum(np.abs(u) * lb[None, :], np.abs(1.0 - u) * lb[None, :])
    hit = near & ~parallel & (s >= -GENERIC_EPS) & (s <= 1 + GENERIC_EPS)
    hit &= (u >= -GENERIC_EPS) & (u <= 1 + GENERIC_EPS)
    touchy = hit & ((ds <= GENERIC_EPS) | (du <= GENERIC_EPS))
    depth_p = DP[:, None] + s * da[:, None]
    depth_q = DQ[None, :] + u * db[None, :]
    gap = depth_p - depth_q
    touchy |= hit & (np.abs(gap) <= GENERIC_EPS)
    flag = bool(parallel.any() or touchy.any())
    signs = np.sign(gap) * np.sign(denom)
    total = int(np.sum(np.where(hit & ~touchy, signs, 0.0)))
    return total, flag


# ---------------------------------------------------------------------------
# ray-cast winding


def raycast_numpy(V, q):
    """Signed count of polyline crossings of the ray from ``q`` towards +x.

    Returns ``(count, on_boundary)``.
    """
    p0 = V - q
    p1 = np.roll(V, -1, axis=0) - q
    e = p1 - p0
    len2 = np.einsum("ij,ij->i", e, e)
    tt = np.clip(-np.einsum("ij,ij->i", p0, e) / len2, 0.0, 1.0)
    closest = p0 + tt[:, None] * e
    if np.min(np.hypot(closest[:, 0], closest[:, 1])) <= GENERIC_EPS:
        return 0, True
    side = p0[:, 0] * p1[:, 1] - p1[:, 0] * p0[:, 1]
    up = (p0[:, 1] <= 0.0) & (p1[:, 1] > 0.0) & (side > 0.0)
    down = (p0[:, 1] > 0.0) & (p1[:, 1] <= 0.0) & (side < 0.0)
    return int(np.count_nonzero(up)) - int(np.count_nonzero(down)), False


if HAVE_NUMBA:

    @njit(cache=True)
    def _det_inplace(a, d):
        if d == 2:
            return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        if d == 3:
            return (
                a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
                - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
                + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
            )
        det = 1.0
        for c in range(d):
            piv = c
            big = abs(a[c, c])
            for k in range(c + 1, d):
                if abs(a[k, c]) > big:
                    big = abs(a[k, c])
                    piv = k
            if big == 0.0:
                return 0.0
            if piv != c:
                for k in range(d):
                    tmp = a[c, k]
                    a[c, k] = a[piv, k]
                    a[piv, k] = tmp
                det = -det
            det *= a[c, c]
            for k in range(c + 1, d):
                f = a[k, c] / a[c, c]
                for l in range(c + 1, d):
                    a[k, l] -= f * a[c, l]
        return det

    @njit(parallel=True, cache=True)
    def _pair_rows_numba(X, JX, Y, JY, wY):
        nx, d = X.shape
        ny = Y.shape[0]
        m = JX.shape[2]
        n = JY.shape[2]
        rows = np.empty(nx)
        mins = np.empty(nx)
        half_d = 0.5 * d
        for i in prange(nx):
            a = np.empty((d, d))
            acc = 0.0
            mn = np.inf
            for j in range(ny):
                r2 = 0.0
                for k in range(d):
                    rk = X[i, k] - Y[j, k]
                    a[k, 0] = rk
                    r2 += rk * rk
                    for c in range(m):
                        a[k, 1 + c] = JX[i, k, c]
                    for c in range(n):
                        a[k, 1 + m + c] = JY[j, k, c]
                det = _det_inplace(a, d)
                acc += wY[j] * det / r2**half_d
                if r2 < mn:
                    mn = r2
            rows[i] = acc
            mins[i] = mn
        return rows, np.sqrt(mins.min())

    def pair_rows_numba(X, JX, Y, JY, wY):
        return _pair_rows_numba(
            np.ascontiguousarray(X, dtype=np.float64),
            np.ascontiguousarray(JX, dtype=np.float64),
            np.ascontiguousarray(Y, dtype=np.float64),
            np.ascontiguousarray(JY, dtype=np.float64),
            np.ascontiguousarray(wY, dtype=np.float64),
        )

    @njit(cache=True)
    def _crossings_numba(P, DP, Q, DQ, eps):
        n1 = P.shape[0]
        n2 = Q.shape[0]
        total = 0
        flag = False
        for i in range(n1):
            i1 = (i + 1) % n1
            ax, ay = P[i, 0], P[i, 1]
            ex, ey = P[i1, 0] - ax, P[i1, 1] - ay
            la = math.sqrt(ex * ex + ey * ey)
            axlo, axhi = min(ax, ax + ex), max(ax, ax + ex)
            aylo, ayhi = min(ay, ay + ey), max(ay, ay + ey)
            for j in range(n2):
                j1 = (j + 1) % n2
                bx, by = Q[j, 0], Q[j, 1]
                fx, fy = Q[j1, 0] - bx, Q[j1, 1] - by
                if min(bx, bx + fx) > axhi + eps or max(bx, bx + fx) < axlo - eps:
                    continue
                if min(by, by + fy) > ayhi + eps or max(by, by + fy) < aylo - eps:
                    continue
                lb = math.sqrt(fx * fx + fy * fy)
                denom = ex * fy - ey * fx
                if abs(denom) <= eps * la * lb:
                    flag = True
                    continue
                wx, wy = bx - ax, by - ay
                s = (wx * fy - wy * fx) / denom
                u = (wx * ey - wy * ex) / denom
                if s < -eps or s > 1 + eps or u < -eps or u > 1 + eps:
                    continue
                if min(abs(s), abs(1 - s)) * la <= eps or min(abs(u), abs(1 - u)) * lb <= eps:
                    flag = True
                    continue
                gap = (DP[i] + s * (DP[i1] - DP[i])) - (DQ[j] + u * (DQ[j1] - DQ[j]))
                if abs(gap) <= eps:
                    flag = True
                    continue
                sg = 1 if gap > 0 else -1
                sd = 1 if denom > 0 else -1
                total += sg * sd
        return total, flag

    def crossings_numba(P, DP, Q, DQ):
        total, flag = _crossings_numba(
            np.ascontiguousarray(P, dtype=np.float64),
            np.ascontiguousarray(DP, dtype=np.float64),
            np.ascontiguousarray(Q, dtype=np.float64),
            np.ascontiguousarray(DQ, dtype=np.float64),
            GENERIC_EPS,
        )
        return int(total), bool(flag)

    @njit(cache=True)
    def _raycast_numba(V, qx, qy, eps):
        n = V.shape[0]
        count = 0
        for i in range(n):
            x0, y0 = V[i, 0] - qx, V[i, 1] - qy
            x1, y1 = V[(i + 1) % n, 0] - qx, V[(i + 1) % n, 1] - qy
            ex, ey = x1 - x0, y1 - y0
            t = -(x0 * ex + y0 * ey) / (ex * ex + ey * ey)
            t = min(1.0, max(0.0, t))
            cx, cy = x0 + t * ex, y0 + t * ey
            if math.sqrt(cx * cx + cy * cy) <= eps:
                return 0, True
            side = x0 * y1 - x1 * y0
            if y0 <= 0.0:
                if y1 > 0.0 and side > 0.0:
                    count += 1
            elif y1 <= 0.0 and side < 0.0:
                count -= 1
        return count, False

    def raycast_numba(V, q):
        count, on = _raycast_numba(
            np.ascontiguousarray(V, dtype=np.float64), float(q[0]), float(q[1]), GENERIC_EPS
        )
        return int(count), bool(on)

    _workers = os.environ.get("LK_WORKERS", "").strip()
    if _workers:
        numba.set_num_threads(max(1, min(int(_workers), numba.config.NUMBA_NUM_THREADS)))

    pair_rows = pair_rows_numba
    crossings = crossings_numba
    raycast = raycast_numba
else:
    pair_rows = pair_rows_numpy
    crossings = crossings_numpy
    raycast = raycast_numpy


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
