"""Quality indicators on sets of objective vectors (minimization).

Sets are ``(n, m)`` float arrays. Hypervolume is estimated by Monte Carlo
because exact computation is exponential in the number of objectives.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist, pdist

DEFAULT_HV_SAMPLES = 10_000
HV_REFERENCE = 1.1
_HV_CHUNK = 200_000
_HV_BLOCK = 2_000


def _as_set(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected an (n, m) array of objective vectors, got shape {arr.shape}")
    return arr


def normalize(F: np.ndarray, ideal: np.ndarray, nadir: np.ndarray) -> np.ndarray:
    """Map objectives to ``(f - ideal) / (nadir - ideal)``."""
    return (np.asarray(F, dtype=float) - ideal) / (nadir - ideal)


def dominates(u, v) -> bool:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return bool(np.all(u <= v) and np.any(u < v))


def domination_matrix(F: np.ndarray) -> np.ndarray:
    """``M[i, j]`` is True iff point i dominates point j."""
    F = _as_set(F)
    n = len(F)
    weakly = np.ones((n, n), dtype=bool)
    equal = np.ones((n, n), dtype=bool)
    for d in range(F.shape[1]):
        a = F[:, None, d]
        b = F[None, :, d]
        weakly &= a <= b
        equal &= a == b
    return weakly & ~equal


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    return ~domination_matrix(F).any(axis=0)


def nd_ratio(F: np.ndarray) -> float:
    F = _as_set(F)
    if len(F) == 0:
        raise ValueError("nd_ratio of an empty set")
    return float(np.count_nonzero(nondominated_mask(F))) / len(F)


def igd(reference: np.ndarray, approx: np.ndarray) -> float:
    """Mean distance from each reference point to its closest approximation point."""
    reference = _as_set(reference)
    approx = _as_set(approx)
    if len(reference) == 0 or len(approx) == 0:
        raise ValueError("IGD needs non-empty reference and approximation sets")
    if reference.shape[1] != approx.shape[1]:
        raise ValueError("reference and approximation sets differ in dimension")
    return float(np.mean(cdist(reference, approx).min(axis=1)))


def avg_distance(F: np.ndarray, scale: float = 1.0) -> float:
    """Mean pairwise Euclidean distance, divided by ``scale``."""
    F = _as_set(F)
    if scale <= 0:
        raise ValueError("scale must be positive")
    if len(F) < 2:
        return 0.0
    return float(np.mean(pdist(F))) / scale


def _sparsity_from_distances(dist: np.ndarray, m: int) -> np.ndarray:
    nearest = np.partition(dist, m - 1, axis=1)[:, :m]
    return np.prod(nearest, axis=1)


def sparsity_levels(F: np.ndarray, m: int | None = None) -> np.ndarray:
    """Vicinity-distance sparsity of every point within its own set.

    The sparsity of a point is the product of the distances to its ``m``
    nearest other points (``m`` defaults to the dimension).
    """
    F = _as_set(F)
    m = F.shape[1] if m is None else m
    if len(F) <= m:
        raise ValueError(f"sparsity needs more than {m} points, got {len(F)}")
    dist = cdist(F, F)
    np.fill_diagonal(dist, np.inf)
    return _sparsity_from_distances(dist, m)


def vicinity_sparsity(index: int, F: np.ndarray, m: int | None = None) -> float:
    F = _as_set(F)
    m = F.shape[1] if m is None else m
    if len(F) <= m:
        raise ValueError(f"sparsity needs more than {m} points, got {len(F)}")
    dist = np.sqrt(np.sum((F - F[index]) ** 2, axis=1))
    dist[index] = np.inf
    return float(np.prod(np.partition(dist, m - 1)[:m]))


def sparsity_against(candidates: np.ndarray, population: np.ndarray, m: int) -> np.ndarray:
    """Sparsity of each candidate measured against a separate population."""
    candidates = _as_set(candidates)
    population = _as_set(population)
    if len(population) < m:
        raise ValueError(f"population needs at least {m} points")
    return _sparsity_from_distances(cdist(candidates, population), m)


def hypervolume(
    F: np.ndarray,
    ref_point=None,
    mc_samples: int = DEFAULT_HV_SAMPLES,
    seed: int | np.random.Generator | None = 0,
    lower=None,
) -> float:
    """Monte Carlo estimate of the hypervolume dominated by ``F``.

    Samples are drawn uniformly in the box ``[lower, ref_point]``; ``lower``
    defaults to the componentwise minimum of the set. Passing the same seed
    and box yields common random numbers across calls, which keeps
    successive estimates comparable.
    """
    F = _as_set(F)
    m = F.shape[1]
    ref = np.full(m, HV_REFERENCE) if ref_point is None else np.asarray(ref_point, dtype=float)
    F = F[np.all(F < ref, axis=1)]
    if len(F) == 0:
        return 0.0
    F = F[nondominated_mask(F)]
    lo = F.min(axis=0) if lower is None else np.minimum(np.asarray(lower, dtype=float), F.min(axis=0))
    volume = float(np.prod(ref - lo))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    hits = 0
    done = 0
    while done < mc_samples:
        n = min(_HV_CHUNK, mc_samples - done)
        samples = lo + rng.random((n, m)) * (ref - lo)
        for start in range(0, n, _HV_BLOCK):
            block = samples[start : start + _HV_BLOCK]
            covered = F[None, :, 0] <= block[:, None, 0]
            for d in range(1, m):
                covered &= F[None, :, d] <= block[:, None, d]
            hits += int(np.count_nonzero(covered.any(axis=1)))
        done += n
    return volume * hits / mc_samples
