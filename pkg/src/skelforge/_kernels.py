"""Optional compiled kernels for the innermost geometry loops.

The pure numpy implementations stay authoritative and are used when numba
is not installed; these loops just remove per-call dispatch overhead on
small arrays, which dominates interactive latency.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def all_points_in_ring(px, py, ax, ay, bx, by, tol):  # pragma: no cover - jit
    """True when every probe point lies in the ring (boundary within tol)."""
    m = px.size
    n = ax.size
    tol2 = tol * tol
    for i in range(m):
        x = px[i]
        y = py[i]
        inside = False
        for j in range(n):
            ayj = ay[j]
            byj = by[j]
            if (ayj > y) != (byj > y):
                xi = ax[j] + (y - ayj) * (bx[j] - ax[j]) / (byj - ayj)
                if x < xi:
                    inside = not inside
        if not inside:
            near = False
            for j in range(n):
                dx = bx[j] - ax[j]
                dy = by[j] - ay[j]
                dd = dx * dx + dy * dy
                if dd > 0.0:
                    t = ((x - ax[j]) * dx + (y - ay[j]) * dy) / dd
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                    ex = x - (ax[j] + t * dx)
                    ey = y - (ay[j] + t * dy)
                else:
                    ex = x - ax[j]
                    ey = y - ay[j]
                if ex * ex + ey * ey <= tol2:
                    near = True
                    break
            if not near:
                return False
    return True


@njit(cache=True)
def slice_hits(px, py, dx, dy, ax, ay, ex, ey, eps):  # pragma: no cover - jit
    """Nearest boundary hit on each side for every slice line."""
    m = px.size
    n = ax.size
    tl = np.empty(m)
    tr = np.empty(m)
    for i in range(m):
        best_pos = np.inf
        best_neg = -np.inf
        for j in range(n):
            denom = dx[i] * ey[j] - dy[i] * ex[j]
            if denom > -eps and denom < eps:
                continue
            qpx = ax[j] - px[i]
            qpy = ay[j] - py[i]
            u = (qpx * dy[i] - qpy * dx[i]) / denom
            if u >= -eps and u < 1.0 - eps:
                t = (qpx * ey[j] - qpy * ex[j]) / denom
                if t > eps:
                    if t < best_pos:
                        best_pos = t
                elif t < -eps:
                    if t > best_neg:
                        best_neg = t
        tl[i] = best_pos
        tr[i] = best_neg
    return tl, tr


@njit(cache=True)
def select_max_error(px, py, s, wl, wr, i_st, i_en, eps, alpha_s, keep):  # pragma: no cover - jit
    """Recursive max-error point selection, marking kept samples in place.

    Matches the numpy path: split at the first index attaining the range
    maximum, recurse only while the maximum exceeds eps.
    """
    n = px.size
    stack_a = np.empty(n + 2, dtype=np.int64)
    stack_b = np.empty(n + 2, dtype=np.int64)
    top = 0
    stack_a[0] = i_st
    stack_b[0] = i_en
    top = 1
    keep[i_st] = True
    keep[i_en] = True
    while top > 0:
        top -= 1
        a = stack_a[top]
        b = stack_b[top]
        if b <= a + 1:
            continue
        chx = px[b] - px[a]
        chy = py[b] - py[a]
        clen = (chx * chx + chy * chy) ** 0.5
        # trapezoid sides in the straightened frame
        tsx = s[b] - s[a]
        t_top_y = wl[b] - wl[a]
        t_bot_y = -wr[b] + wr[a]
        top_dd = tsx * tsx + t_top_y * t_top_y
        bot_dd = tsx * tsx + t_bot_y * t_bot_y
        best = a
        best_e = -1.0
        for i in range(a + 1, b):
            rx = px[i] - px[a]
            ry = py[i] - py[a]
            if clen > 1e-15:
                d = rx * chy - ry * chx
                if d < 0.0:
                    d = -d
                d /= clen
            else:
                d = (rx * rx + ry * ry) ** 0.5
            e = d
            if alpha_s != 0.0:
                sx = s[i] - s[a]
                # top side distance
                yy = wl[i] - wl[a]
                if top_dd > 1e-30:
                    t = (sx * tsx + yy * t_top_y) / top_dd
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                else:
                    t = 0.0
                ddx = sx - t * tsx
                ddy = yy - t * t_top_y
                e_top = (ddx * ddx + ddy * ddy) ** 0.5
                yy = -wr[i] + wr[a]
                if bot_dd > 1e-30:
                    t = (sx * tsx + yy * t_bot_y) / bot_dd
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                else:
                    t = 0.0
                ddx = sx - t * tsx
                ddy = yy - t * t_bot_y
                e_bot = (ddx * ddx + ddy * ddy) ** 0.5
                e = d + alpha_s * (e_top + e_bot)
            if e > best_e:
                best_e = e
                best = i
        if best_e > eps:
            keep[best] = True
            stack_a[top] = a
            stack_b[top] = best
            top += 1
            stack_a[top] = best
            stack_b[top] = b
            top += 1
