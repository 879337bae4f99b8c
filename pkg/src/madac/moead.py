"""A controllable MOEA/D engine.

Every hyperparameter the controllers act on (neighborhood size, reproduction
operator, DE scaling factor, weight adaptation) is supplied per generation
through a :class:`GenerationConfig`, so the engine can be stepped one
generation at a time by an external policy.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import numpy as np
from scipy.spatial.distance import cdist

from .indicators import domination_matrix, normalize, sparsity_against, sparsity_levels
from .problems import MopInstance
from .rng import RngStream, as_stream

OPERATORS = ("SBX", "OP1", "OP2", "OP3", "OP4")
DE_OPERATORS = OPERATORS[1:]
DE_PARENT_COUNTS = {"OP1": 2, "OP2": 4, "OP3": 5, "OP4": 3}
NEIGHBORHOOD_SIZES = (15, 20, 25, 30)
SCALING_FACTORS = (0.4, 0.5, 0.6, 0.7)
K_FACTOR = 0.5
SBX_ETA = 20.0
PM_ETA = 20.0
ELITE_FACTOR = 1.5
ADJUST_FRACTION = 0.05
AWA_EPSILON = 1e-6


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class GenerationConfig:
    neighborhood_size: int = 20
    operator: str = "SBX"
    scaling_factor: float = 0.5
    adapt_weights: bool = False
    K: float = K_FACTOR

    def __post_init__(self):
        if self.neighborhood_size not in NEIGHBORHOOD_SIZES:
            raise ConfigurationError(f"neighborhood size must be one of {NEIGHBORHOOD_SIZES}")
        if self.operator not in OPERATORS:
            raise ConfigurationError(f"operator must be one of {OPERATORS}")
        if self.scaling_factor not in SCALING_FACTORS:
            raise ConfigurationError(f"scaling factor must be one of {SCALING_FACTORS}")


class OperatorPolicy(Protocol):
    """Per-offspring operator selection, used by bandit-style controllers."""

    def select(self, subproblem: int) -> str: ...

    def credit(self, operator: str, parent_tch: float, child_tch: float) -> None: ...


@dataclass
class GenerationStats:
    replacements: int
    evaluations: int


# --------------------------------------------------------------------------
# Weights and neighborhoods


def lattice_size(m: int, H: int) -> int:
    return math.comb(H + m - 1, m - 1)


def generate_weights(m: int, N: int) -> np.ndarray:
    """Das-Dennis simplex-lattice weights; ``N`` must be a lattice size for ``m``."""
    H = 1
    while lattice_size(m, H) < N:
        H += 1
    if lattice_size(m, H) != N:
        below = lattice_size(m, H - 1) if H > 1 else None
        above = lattice_size(m, H)
        nearest = below if below is not None and N - below <= above - N else above
        raise ConfigurationError(
            f"no simplex lattice with {N} weights for m={m}; nearest valid size is {nearest}"
        )
    from .problems import simplex_lattice

    return simplex_lattice(m, H)


def neighbor_order(weights: np.ndarray) -> np.ndarray:
    """All indices per row, sorted by weight distance (ties by lower index)."""
    dist = cdist(weights, weights)
    return np.argsort(dist, axis=1, kind="stable")


def build_neighborhoods(weights: np.ndarray, neighborhood_size: int) -> np.ndarray:
    if neighborhood_size > len(weights):
        raise ConfigurationError("neighborhood size exceeds the number of weights")
    return neighbor_order(weights)[:, :neighborhood_size]


def tch(f, w, ideal) -> float:
    return float(np.max(np.asarray(w) * np.abs(np.asarray(f) - np.asarray(ideal))))


# --------------------------------------------------------------------------
# Reproduction


def de_offspring(op: str, x_i, parents, F: float, K: float, lower, upper) -> np.ndarray:
    need = DE_PARENT_COUNTS.get(op)
    if need is None:
        raise ConfigurationError(f"unknown DE operator {op!r}")
    if len(parents) < need:
        raise ValueError(f"{op} needs {need} distinct parents, got {len(parents)}")
    x = np.asarray(x_i, dtype=float)
    r = [np.asarray(p, dtype=float) for p in parents]
    if op == "OP1":
        child = x + F * (r[0] - r[1])
    elif op == "OP2":
        child = x + F * (r[0] - r[1]) + F * (r[2] - r[3])
    elif op == "OP3":
        child = x + K * (x - r[0]) + F * (r[1] - r[2]) + F * (r[3] - r[4])
    else:
        child = x + K * (x - r[0]) + F * (r[1] - r[2])
    return np.clip(child, lower, upper)


def sbx_offspring(p1, p2, eta: float, rng, lower, upper) -> np.ndarray:
    """One child of simulated binary crossover (per-variable probability 0.5)."""
    gen = as_stream(rng).generator if not isinstance(rng, np.random.Generator) else rng
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    n = len(p1)
    u = gen.random(n)
    cross = gen.random(n) < 0.5
    pick_second = gen.random() < 0.5
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)),
        (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0)),
    )
    cross &= np.abs(p1 - p2) > 1e-14
    if pick_second:
        child = np.where(cross, 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2), p2)
    else:
        child = np.where(cross, 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2), p1)
    return np.clip(child, lower, upper)


def polynomial_mutation(x, prob: float, eta: float, lower, upper, rng) -> np.ndarray:
    gen = as_stream(rng).generator if not isinstance(rng, np.random.Generator) else rng
    y = np.array(x, dtype=float)
    n = len(y)
    mutate = gen.random(n) < prob
    r = gen.random(n)
    if not mutate.any():
        return y
    span = upper - lower
    d1 = (y - lower) / span
    d2 = (upper - y) / span
    power = 1.0 / (eta + 1.0)
    with np.errstate(invalid="ignore"):
        low_val = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1) ** (eta + 1.0)
        high_val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2) ** (eta + 1.0)
        delta = np.where(r < 0.5, low_val**power - 1.0, 1.0 - high_val**power)
    y = np.where(mutate, y + delta * span, y)
    return np.clip(y, lower, upper)


# --------------------------------------------------------------------------
# Run state


class DecompositionState:
    """Population, weights, neighborhoods, ideal point and elite archive of one run."""

    def __init__(
        self,
        instance: MopInstance,
        X: np.ndarray,
        F: np.ndarray,
        weights: np.ndarray,
        rng: RngStream,
        neighborhood_size: int = 20,
        elite_capacity: int | None = None,
    ):
        self.instance = instance
        self.X = np.array(X, dtype=float)
        self.F = np.array(F, dtype=float)
        self.weights = np.array(weights, dtype=float)
        self.rng = rng
        self.N = len(self.X)
        self.ideal = self.F.min(axis=0)
        self.elite_capacity = elite_capacity or math.ceil(ELITE_FACTOR * self.N)
        self.elite_X = np.empty((0, instance.D))
        self.elite_F = np.empty((0, instance.m))
        self.last_weight_adapt_step = 0
        self.generation = 0
        self.evaluations = len(self.X)
        self.set_neighborhood_size(neighborhood_size)
        update_elite(self, self.X, self.F)

    def set_neighborhood_size(self, size: int) -> None:
        if size > self.N:
            raise ConfigurationError("neighborhood size exceeds population size")
        if getattr(self, "_order", None) is None:
            self._order = neighbor_order(self.weights)
        self.neighborhood_size = size
        self.neighborhoods = self._order[:, :size]

    def rebuild_neighborhoods(self) -> None:
        self._order = None
        self.set_neighborhood_size(self.neighborhood_size)

    def normalized(self, F: np.ndarray) -> np.ndarray:
        return normalize(F, self.instance.ideal, self.instance.nadir)

    def tch_values(self) -> np.ndarray:
        """TCH value of each incumbent on its own subproblem."""
        return np.max(self.weights * np.abs(self.F - self.ideal), axis=1)


def initialize_state(
    instance: MopInstance,
    N: int = 210,
    rng: int | RngStream | None = None,
    neighborhood_size: int = 20,
    evaluate: Callable[[np.ndarray], np.ndarray] | None = None,
) -> DecompositionState:
    rng = as_stream(rng)
    evaluate = evaluate or instance.evaluate
    weights = generate_weights(instance.m, N)
    X = instance.lower + rng.random((N, instance.D)) * (instance.upper - instance.lower)
    F = np.array([evaluate(x) for x in X])
    return DecompositionState(instance, X, F, weights, rng, neighborhood_size)


# --------------------------------------------------------------------------
# Elite archive


def _prune_least_sparse(Fn: np.ndarray, capacity: int, m: int) -> np.ndarray:
    """Indices kept after repeatedly dropping the member with the lowest sparsity."""
    n = len(Fn)
    if n <= capacity:
        return np.arange(n)
    k = min(m, n - 1)
    dist = cdist(Fn, Fn)
    np.fill_diagonal(dist, np.inf)
    nearest = np.partition(dist, k - 1, axis=1)[:, :k]
    sparsity = np.prod(nearest, axis=1)
    kth = nearest.max(axis=1)
    alive = np.ones(n, dtype=bool)
    for _ in range(n - capacity):
        r = int(np.argmin(np.where(alive, sparsity, np.inf)))
        alive[r] = False
        sparsity[r] = np.inf
        column = dist[:, r].copy()
        dist[r, :] = np.inf
        dist[:, r] = np.inf
        affected = np.flatnonzero(alive & (column <= kth))
        if len(affected):
            part = np.partition(dist[affected], k - 1, axis=1)[:, :k]
            sparsity[affected] = np.prod(part, axis=1)
            kth[affected] = part.max(axis=1)
    return np.flatnonzero(alive)


def update_elite(state: DecompositionState, cand_X: np.ndarray, cand_F: np.ndarray) -> None:
    """Merge candidates into the elite archive, keeping it non-dominated and bounded."""
    X = np.vstack([state.elite_X, np.atleast_2d(cand_X)])
    F = np.vstack([state.elite_F, np.atleast_2d(cand_F)])
    keep = ~domination_matrix(F).any(axis=0)
    X, F = X[keep], F[keep]
    if len(F) > state.elite_capacity:
        idx = _prune_least_sparse(state.normalized(F), state.elite_capacity, state.instance.m)
        X, F = X[idx], F[idx]
    state.elite_X, state.elite_F = X, F


# --------------------------------------------------------------------------
# Generation step


def step_generation(
    state: DecompositionState,
    cfg: GenerationConfig,
    evaluate: Callable[[np.ndarray], np.ndarray] | None = None,
    operator_policy: OperatorPolicy | None = None,
) -> GenerationStats:
    """Run one MOEA/D generation: one offspring per subproblem, in index order."""
    inst = state.instance
    evaluate = evaluate or inst.evaluate
    if cfg.neighborhood_size != state.neighborhood_size:
        state.set_neighborhood_size(cfg.neighborhood_size)
    gen = state.rng.generator
    lower, upper = inst.lower, inst.upper
    pm_prob = 1.0 / inst.D
    children_X = np.empty((state.N, inst.D))
    children_F = np.empty((state.N, inst.m))
    replacements = 0

    for i in range(state.N):
        nb = state.neighborhoods[i]
        op = operator_policy.select(i) if operator_policy is not None else cfg.operator
        if op == "SBX":
            a, b = gen.choice(nb, 2, replace=False)
            child = sbx_offspring(state.X[a], state.X[b], SBX_ETA, gen, lower, upper)
        else:
            pool = nb[nb != i]
            need = DE_PARENT_COUNTS[op]
            assert len(pool) >= need, "neighborhood too small for the DE operator"
            parents = state.X[gen.choice(pool, need, replace=False)]
            child = de_offspring(op, state.X[i], parents, cfg.scaling_factor, cfg.K, lower, upper)
        child = polynomial_mutation(child, pm_prob, PM_ETA, lower, upper, gen)
        f = np.asarray(evaluate(child), dtype=float)
        state.evaluations += 1
        np.minimum(state.ideal, f, out=state.ideal)

        w = state.weights[nb]
        g_child = np.max(w * np.abs(f - state.ideal), axis=1)
        g_old = np.max(w * np.abs(state.F[nb] - state.ideal), axis=1)
        better = g_child < g_old
        if operator_policy is not None:
            own = int(np.flatnonzero(nb == i)[0])
            operator_policy.credit(op, float(g_old[own]), float(g_child[own]))
        if better.any():
            targets = nb[better]
            state.X[targets] = child
            state.F[targets] = f
            replacements += len(targets)
        children_X[i] = child
        children_F[i] = f

    update_elite(state, children_X, children_F)
    state.generation += 1
    return GenerationStats(replacements=replacements, evaluations=state.N)


# --------------------------------------------------------------------------
# Weight adaptation


def adapt_weights(state: DecompositionState) -> int:
    """Replace the most crowded subproblems with sparse elite solutions.

    Removes the ``floor(0.05 N)`` incumbents with the lowest sparsity, then
    adds as many elite members, each time picking the one that is sparsest
    with respect to the current population. Each added solution gets the
    weight ``w_j ~ 1 / (f_j - z*_j + 1e-6)`` normalized onto the simplex.
    Returns the number of elite solutions added.
    """
    if len(state.elite_F) == 0:
        raise ValueError("weight adaptation needs a non-empty elite archive")
    m = state.instance.m
    n_adjust = int(math.floor(ADJUST_FRACTION * state.N))
    if n_adjust == 0:
        return 0

    pop_norm = state.normalized(state.F)
    sparsity = sparsity_levels(pop_norm, m)
    removed = np.argsort(sparsity, kind="stable")[:n_adjust]
    kept = np.setdiff1d(np.arange(state.N), removed)

    X = [state.X[kept]]
    F = [state.F[kept]]
    W = [state.weights[kept]]
    current = pop_norm[kept]
    elite_norm = state.normalized(state.elite_F)
    available = np.ones(len(elite_norm), dtype=bool)
    added = 0
    for _ in range(n_adjust):
        if not available.any():
            break
        idx = np.flatnonzero(available)
        sp = sparsity_against(elite_norm[idx], current, m)
        pick = int(idx[np.argmax(sp)])
        available[pick] = False
        f = state.elite_F[pick]
        w = 1.0 / (f - state.ideal + AWA_EPSILON)
        X.append(state.elite_X[pick][None])
        F.append(f[None])
        W.append((w / w.sum())[None])
        current = np.vstack([current, elite_norm[pick][None]])
        added += 1

    if added < n_adjust:
        # Degenerate path: restore the least crowded of the removed pairs.
        back = removed[np.argsort(-sparsity[removed], kind="stable")][: n_adjust - added]
        X.append(state.X[back])
        F.append(state.F[back])
        W.append(state.weights[back])

    state.X = np.vstack(X)
    state.F = np.vstack(F)
    state.weights = np.vstack(W)
    state.rebuild_neighborhoods()
    return added


def weight_adaptation_allowed(t: int, T: int, last_adapt: int) -> bool:
    """Frequency guard: enough generations since the last adaptation, not in the final 10%."""
    gap = max(10, math.ceil(T / 20))
    return t - last_adapt >= gap and t <= 0.9 * T


# --------------------------------------------------------------------------
# Export


def export_population_csv(state: DecompositionState, path: str | Path) -> None:
    D, m = state.instance.D, state.instance.m
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(D)] + [f"f{j + 1}" for j in range(m)])
        for x, f in zip(state.X, state.F):
            writer.writerow([repr(float(v)) for v in x] + [repr(float(v)) for v in f])
