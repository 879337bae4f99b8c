"""DTLZ2/DTLZ4 and WFG4-WFG9 test problems with analytic reference fronts.

All problems are minimized and share a concave Pareto front: the positive
unit sphere for DTLZ, and the sphere scaled by ``2j`` along objective ``j``
for WFG.

Variable counts follow common practice: DTLZ uses ``D = m + 9``; WFG uses
``k = 2(m - 1)`` position and ``l = 20`` distance parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

FAMILIES = ("DTLZ2", "DTLZ4", "WFG4", "WFG5", "WFG6", "WFG7", "WFG8", "WFG9")
OBJECTIVE_COUNTS = (3, 5, 7)
WFG_DISTANCE_PARAMS = 20
DTLZ4_ALPHA = 100.0


class BoundsViolation(ValueError):
    """Raised when a decision vector lies outside the box constraints."""


@dataclass(frozen=True)
class MopInstance:
    family: str
    m: int
    D: int
    lower: np.ndarray = field(repr=False, compare=False)
    upper: np.ndarray = field(repr=False, compare=False)
    ideal: np.ndarray = field(repr=False, compare=False)
    nadir: np.ndarray = field(repr=False, compare=False)

    @property
    def name(self) -> str:
        return f"{self.family}_{self.m}"

    @property
    def is_wfg(self) -> bool:
        return self.family.startswith("WFG")

    @property
    def k(self) -> int:
        """Number of WFG position parameters (``m - 1`` for DTLZ)."""
        return 2 * (self.m - 1) if self.is_wfg else self.m - 1

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return evaluate(self, x)


def make_instance(family: str, m: int) -> MopInstance:
    family = family.upper()
    if family not in FAMILIES:
        raise ValueError(f"unknown problem family {family!r}; expected one of {FAMILIES}")
    if m not in OBJECTIVE_COUNTS:
        raise ValueError(f"number of objectives must be in {OBJECTIVE_COUNTS}, got {m}")
    if family.startswith("DTLZ"):
        D = m + 9
        lower, upper = np.zeros(D), np.ones(D)
        nadir = np.ones(m)
    else:
        D = 2 * (m - 1) + WFG_DISTANCE_PARAMS
        lower, upper = np.zeros(D), 2.0 * np.arange(1, D + 1)
        nadir = 2.0 * np.arange(1, m + 1)
    for arr in (lower, upper, nadir):
        arr.setflags(write=False)
    ideal = np.zeros(m)
    ideal.setflags(write=False)
    return MopInstance(family, m, D, lower, upper, ideal, nadir)


def parse_instance(name: str) -> MopInstance:
    """Parse identifiers such as ``"DTLZ2_3"`` or ``"WFG9_7"``."""
    try:
        family, m = name.strip().rsplit("_", 1)
        return make_instance(family, int(m))
    except ValueError as exc:
        raise ValueError(f"bad instance identifier {name!r}: {exc}") from None


def instance_bounds(instance: MopInstance) -> tuple[np.ndarray, np.ndarray]:
    return instance.ideal.copy(), instance.nadir.copy()


def evaluate(instance: MopInstance, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.D,):
        raise ValueError(f"expected {instance.D} decision variables, got shape {x.shape}")
    if np.any(x < instance.lower) or np.any(x > instance.upper):
        raise BoundsViolation(f"decision vector outside bounds for {instance.name}")
    return _EVALUATORS[instance.family](x, instance.m)


# --------------------------------------------------------------------------
# DTLZ


def _sphere_front(theta: np.ndarray, m: int) -> np.ndarray:
    """Map angles in [0, 1]^(m-1) onto the unit sphere."""
    c = np.cos(theta * (np.pi / 2))
    s = np.sin(theta * (np.pi / 2))
    f = np.ones(m)
    for j in range(m):
        f[j] = np.prod(c[: m - 1 - j])
        if j > 0:
            f[j] *= s[m - 1 - j]
    return f


def _dtlz2(x: np.ndarray, m: int) -> np.ndarray:
    g = np.sum((x[m - 1 :] - 0.5) ** 2)
    return (1.0 + g) * _sphere_front(x[: m - 1], m)


def _dtlz4(x: np.ndarray, m: int) -> np.ndarray:
    g = np.sum((x[m - 1 :] - 0.5) ** 2)
    return (1.0 + g) * _sphere_front(x[: m - 1] ** DTLZ4_ALPHA, m)


# --------------------------------------------------------------------------
# WFG transformations


def _correct01(y):
    return np.clip(y, 0.0, 1.0)


def s_linear(y, A):
    return _correct01(np.abs(y - A) / np.abs(np.floor(A - y) + A))


def s_multi(y, A, B, C):
    tmp1 = np.abs(y - C) / (2.0 * (np.floor(C - y) + C))
    tmp2 = (4.0 * A + 2.0) * np.pi * (0.5 - tmp1)
    return _correct01((1.0 + np.cos(tmp2) + 4.0 * B * tmp1**2) / (B + 2.0))


def s_decept(y, A, B, C):
    tmp1 = np.floor(y - A + B) * (1.0 - C + (A - B) / B) / (A - B)
    tmp2 = np.floor(A + B - y) * (1.0 - C + (1.0 - A - B) / B) / (1.0 - A - B)
    return _correct01(1.0 + (np.abs(y - A) - B) * (tmp1 + tmp2 + 1.0 / B))


def b_param(y, u, A, B, C):
    v = A - (1.0 - 2.0 * u) * np.abs(np.floor(0.5 - u) + A)
    return _correct01(y ** (B + (C - B) * v))


def r_sum(y, w):
    return _correct01(np.dot(y, w) / np.sum(w))


def r_nonsep(y, A):
    n = len(y)
    total = 0.0
    for j in range(n):
        total += y[j]
        for k in range(A - 1):
            total += abs(y[j] - y[(j + k + 1) % n])
    half = math.ceil(A / 2.0)
    return _correct01(total / ((n / A) * half * (1.0 + 2.0 * A - 2.0 * half)))


_BP_A, _BP_B, _BP_C = 0.98 / 49.98, 0.02, 50.0


def _concave(x: np.ndarray, m: int) -> np.ndarray:
    """Concave WFG shape functions h_1..h_m of the position vector x (len m-1)."""
    # Same as the DTLZ sphere with sine and cosine swapped.
    return _sphere_front(1.0 - x, m)


def _wfg_objectives(t: np.ndarray, m: int) -> np.ndarray:
    # Degeneracy constants A_i are all 1 for the WFG4-9 family.
    xm = t[-1]
    x = np.maximum(xm, 1.0) * (t[:-1] - 0.5) + 0.5
    h = _concave(x, m)
    return xm + 2.0 * np.arange(1, m + 1) * h


def _reduce_sum(y: np.ndarray, k: int, m: int) -> np.ndarray:
    gap = k // (m - 1)
    t = np.empty(m)
    for i in range(m - 1):
        t[i] = np.mean(y[i * gap : (i + 1) * gap])
    t[-1] = np.mean(y[k:])
    return _correct01(t)


def _reduce_nonsep(y: np.ndarray, k: int, m: int) -> np.ndarray:
    gap = k // (m - 1)
    t = np.empty(m)
    for i in range(m - 1):
        t[i] = r_nonsep(y[i * gap : (i + 1) * gap], gap)
    t[-1] = r_nonsep(y[k:], len(y) - k)
    return t


def _normalize_z(x: np.ndarray) -> np.ndarray:
    return x / (2.0 * np.arange(1, len(x) + 1))


def _wfg4(x, m):
    k = 2 * (m - 1)
    y = s_multi(_normalize_z(x), 30.0, 10.0, 0.35)
    return _wfg_objectives(_reduce_sum(y, k, m), m)


def _wfg5(x, m):
    k = 2 * (m - 1)
    y = s_decept(_normalize_z(x), 0.35, 0.001, 0.05)
    return _wfg_objectives(_reduce_sum(y, k, m), m)


def _wfg6(x, m):
    k = 2 * (m - 1)
    y = _normalize_z(x)
    y[k:] = s_linear(y[k:], 0.35)
    return _wfg_objectives(_reduce_nonsep(y, k, m), m)


def _suffix_means(y: np.ndarray) -> np.ndarray:
    """u[i] = mean(y[i+1:]) for i < n-1."""
    n = len(y)
    tail = np.cumsum(y[::-1])[::-1]
    return tail[1:] / np.arange(n - 1, 0, -1)


def _prefix_means(y: np.ndarray) -> np.ndarray:
    """Entry i - 1 holds mean(y[:i]) for i >= 1."""
    return np.cumsum(y)[:-1] / np.arange(1, len(y))


def _wfg7(x, m):
    k = 2 * (m - 1)
    y = _normalize_z(x)
    u = _correct01(_suffix_means(y))
    y[:k] = b_param(y[:k], u[:k], _BP_A, _BP_B, _BP_C)
    y[k:] = s_linear(y[k:], 0.35)
    return _wfg_objectives(_reduce_sum(y, k, m), m)


def _wfg8(x, m):
    k = 2 * (m - 1)
    y = _normalize_z(x)
    u = _correct01(_prefix_means(y))
    y[k:] = b_param(y[k:], u[k - 1 :], _BP_A, _BP_B, _BP_C)
    y[k:] = s_linear(y[k:], 0.35)
    return _wfg_objectives(_reduce_sum(y, k, m), m)


def _wfg9(x, m):
    k = 2 * (m - 1)
    y = _normalize_z(x)
    u = _correct01(_suffix_means(y))
    y[:-1] = b_param(y[:-1], u, _BP_A, _BP_B, _BP_C)
    y[:k] = s_decept(y[:k], 0.35, 0.001, 0.05)
    y[k:] = s_multi(y[k:], 30.0, 95.0, 0.35)
    return _wfg_objectives(_reduce_nonsep(y, k, m), m)


_EVALUATORS = {
    "DTLZ2": _dtlz2,
    "DTLZ4": _dtlz4,
    "WFG4": _wfg4,
    "WFG5": _wfg5,
    "WFG6": _wfg6,
    "WFG7": _wfg7,
    "WFG8": _wfg8,
    "WFG9": _wfg9,
}


# --------------------------------------------------------------------------
# Reference fronts


def simplex_lattice(m: int, H: int) -> np.ndarray:
    """All points of the Das-Dennis lattice with H divisions on the m-simplex."""
    points = []

    def rec(prefix: list[int], left: int, depth: int) -> None:
        if depth == m - 1:
            points.append(prefix + [left])
            return
        for v in range(left + 1):
            rec(prefix + [v], left - v, depth + 1)

    rec([], H, 0)
    return np.asarray(points, dtype=float) / H


def reference_divisions(m: int, target_count: int) -> int:
    H = 1
    while math.comb(H + m - 1, m - 1) < target_count:
        H += 1
    return H


@lru_cache(maxsize=64)
def _cached_front(family: str, m: int, target_count: int) -> np.ndarray:
    lattice = simplex_lattice(m, reference_divisions(m, target_count))
    front = lattice / np.linalg.norm(lattice, axis=1, keepdims=True)
    if family.startswith("WFG"):
        front = front * (2.0 * np.arange(1, m + 1))
    front.setflags(write=False)
    return front


def default_reference_size(m: int) -> int:
    return 990 if m == 3 else 2000


def sample_reference_front(instance: MopInstance, target_count: int | None = None) -> np.ndarray:
    """Deterministic, mutually non-dominated sample of the true Pareto front.

    Returns at least ``target_count`` points as an ``(n, m)`` array.
    """
    if target_count is None:
        target_count = default_reference_size(instance.m)
    if target_count < instance.m:
        raise ValueError("target_count must be at least the number of objectives")
    return _cached_front(instance.family, instance.m, int(target_count))


def optimal_solution(instance: MopInstance, position: np.ndarray) -> np.ndarray:
    """A Pareto-optimal decision vector with the given position parameters.

    ``position`` holds values in [0, 1] for the ``k`` position-related
    variables. Supported for DTLZ2/DTLZ4 and WFG4-WFG7, whose optimal
    distance parameters are independent of position.
    """
    position = np.asarray(position, dtype=float)
    if instance.family in ("DTLZ2", "DTLZ4"):
        return np.concatenate([position, np.full(instance.D - len(position), 0.5)])
    if instance.family in ("WFG4", "WFG5", "WFG6", "WFG7"):
        scale = 2.0 * np.arange(1, instance.D + 1)
        z = np.empty(instance.D)
        z[: instance.k] = position * scale[: instance.k]
        z[instance.k :] = 0.35 * scale[instance.k :]
        return z
    raise NotImplementedError(f"no closed-form optimum for {instance.family}")
