"""Slow, independent reference implementations used only by the tests.

Every function here is written from the textbook definition with plain
loops so that it shares no code path with the package.
"""

from __future__ import annotations

import itertools
import math


def euclid(u, v) -> float:
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(u, v)))


def igd_oracle(reference, approx) -> float:
    total = 0.0
    for r in reference:
        total += min(euclid(r, a) for a in approx)
    return total / len(reference)


def dominates_oracle(u, v) -> bool:
    no_worse = all(a <= b for a, b in zip(u, v))
    better = any(a < b for a, b in zip(u, v))
    return no_worse and better


def nd_ratio_oracle(points) -> float:
    count = 0
    for i, p in enumerate(points):
        if not any(dominates_oracle(q, p) for j, q in enumerate(points) if j != i):
            count += 1
    return count / len(points)


def avg_distance_oracle(points, scale=1.0) -> float:
    n = len(points)
    if n < 2:
        return 0.0
    total = 0.0
    pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            total += euclid(points[i], points[j])
            pairs += 1
    return total / pairs / scale


def sparsity_oracle(index, points, m) -> float:
    dists = sorted(euclid(points[index], q) for j, q in enumerate(points) if j != index)
    out = 1.0
    for d in dists[:m]:
        out *= d
    return out


def neighborhoods_oracle(weights, size):
    out = []
    for i, w in enumerate(weights):
        keyed = sorted(range(len(weights)), key=lambda j: (euclid(w, weights[j]), j))
        out.append(keyed[:size])
    return out


# --------------------------------------------------------------------------
# Exact hypervolume by sweeping


def hv2d_exact(points, ref) -> float:
    pts = sorted((p for p in points if p[0] < ref[0] and p[1] < ref[1]), key=lambda p: (p[0], p[1]))
    area = 0.0
    best_y = ref[1]
    for k, (x, y) in enumerate(pts):
        if y < best_y:
            best_y = y
        next_x = pts[k + 1][0] if k + 1 < len(pts) else ref[0]
        area += (next_x - x) * (ref[1] - best_y)
    return area


def hv3d_exact(points, ref) -> float:
    pts = [p for p in points if all(p[d] < ref[d] for d in range(3))]
    levels = sorted(set(p[2] for p in pts))
    volume = 0.0
    for k, z in enumerate(levels):
        top = levels[k + 1] if k + 1 < len(levels) else ref[2]
        slab = [(p[0], p[1]) for p in pts if p[2] <= z]
        volume += hv2d_exact(slab, ref[:2]) * (top - z)
    return volume


# --------------------------------------------------------------------------
# WFG4, transcribed from the toolkit definition


def _s_multi(y, A, B, C):
    tmp = abs(y - C) / (2.0 * (math.floor(C - y) + C))
    return (1.0 + math.cos((4.0 * A + 2.0) * math.pi * (0.5 - tmp)) + 4.0 * B * tmp * tmp) / (B + 2.0)


def wfg4_oracle(z, m, k):
    n = len(z)
    y = [z[i] / (2.0 * (i + 1)) for i in range(n)]
    y = [_s_multi(v, 30.0, 10.0, 0.35) for v in y]
    gap = k // (m - 1)
    t = []
    for i in range(m - 1):
        block = y[i * gap : (i + 1) * gap]
        t.append(sum(block) / len(block))
    tail = y[k:]
    t.append(sum(tail) / len(tail))
    x = t[: m - 1]
    x_m = t[m - 1]
    f = []
    for j in range(1, m + 1):
        h = 1.0
        if j == 1:
            for v in x:
                h *= math.sin(v * math.pi / 2.0)
        elif j < m:
            for v in x[: m - j]:
                h *= math.sin(v * math.pi / 2.0)
            h *= math.cos(x[m - j] * math.pi / 2.0)
        else:
            h = math.cos(x[0] * math.pi / 2.0)
        f.append(x_m + 2.0 * j * h)
    return f


# --------------------------------------------------------------------------
# Rank-sum test by enumerating label assignments


def mann_whitney_u(a, b) -> float:
    u = 0.0
    for x in a:
        for y in b:
            if x < y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


def ranksum_exact_oracle(a, b) -> float:
    """Two-sided permutation p-value of the U statistic."""
    pooled = list(a) + list(b)
    n1 = len(a)
    observed = mann_whitney_u(a, b)
    below = above = total = 0
    for chosen in itertools.combinations(range(len(pooled)), n1):
        pick = set(chosen)
        xs = [pooled[i] for i in chosen]
        ys = [pooled[i] for i in range(len(pooled)) if i not in pick]
        u = mann_whitney_u(xs, ys)
        total += 1
        below += u <= observed + 1e-9
        above += u >= observed - 1e-9
    return min(1.0, 2.0 * min(below, above) / total)
