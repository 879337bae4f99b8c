"""Non-learned controllers: static settings, MA-UCB, FRRMAB and interval AWA."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .env.actions import ACTION_CARDINALITIES, JointAction
from .moead import DE_OPERATORS
from .rng import as_stream

ORIGINAL_MOEAD = JointAction("N", 20, "SBX", 0.5)


def static_action(operator: str = "SBX", neighborhood_size: int = 20, scaling_factor: float = 0.5) -> JointAction:
    return JointAction("N", neighborhood_size, operator, scaling_factor)


class StaticController:
    def __init__(self, action: JointAction = ORIGINAL_MOEAD):
        self.action = action

    def act(self, obs, greedy: bool = True) -> JointAction:
        return self.action


# --------------------------------------------------------------------------
# UCB


@dataclass
class UcbArmStats:
    n_arms: int
    c: float = 1.0
    values: np.ndarray = field(default=None)
    counts: np.ndarray = field(default=None)
    t: int = 0

    def __post_init__(self):
        if self.values is None:
            self.values = np.zeros(self.n_arms)
        if self.counts is None:
            self.counts = np.zeros(self.n_arms, dtype=np.int64)


def ucb_select(stats: UcbArmStats) -> int:
    untried = np.flatnonzero(stats.counts == 0)
    if len(untried):
        return int(untried[0])
    t = max(stats.t, 1)
    scores = stats.values + stats.c * np.sqrt(math.log(t) / stats.counts)
    return int(np.argmax(scores))


def ucb_update(stats: UcbArmStats, arm: int, reward: float) -> None:
    stats.counts[arm] += 1
    stats.t += 1
    stats.values[arm] += (reward - stats.values[arm]) / stats.counts[arm]


class MaUcbController:
    """Independent UCB bandits, one per agent, all fed the team reward."""

    def __init__(self, cardinalities=ACTION_CARDINALITIES, c: float = 1.0):
        self.cardinalities = tuple(cardinalities)
        self.c = c
        self.begin_episode()

    def begin_episode(self, env=None) -> None:
        self.agents = [UcbArmStats(n, self.c) for n in self.cardinalities]
        self._last: tuple[int, ...] | None = None

    def act(self, obs, greedy: bool = True) -> tuple[int, ...]:
        self._last = tuple(ucb_select(s) for s in self.agents)
        return self._last

    def observe(self, reward: float) -> None:
        if self._last is None:
            return
        for stats, arm in zip(self.agents, self._last):
            ucb_update(stats, arm, reward)


# --------------------------------------------------------------------------
# FRRMAB


class FrrmabState:
    """Sliding window of fitness-improvement rates with rank-decayed credit."""

    def __init__(
        self,
        window: int,
        decay: float = 0.3,
        scaling: float = 2.0,
        operators=DE_OPERATORS,
        rng=None,
    ):
        self.operators = tuple(operators)
        self.window: deque[tuple[int, float]] = deque(maxlen=max(1, int(window)))
        self.decay = decay
        self.scaling = scaling
        self.rng = as_stream(rng)

    def rewards_and_counts(self) -> tuple[np.ndarray, np.ndarray]:
        K = len(self.operators)
        reward = np.zeros(K)
        count = np.zeros(K, dtype=np.int64)
        for op, fir in self.window:
            reward[op] += fir
            count[op] += 1
        return reward, count

    def frr(self) -> np.ndarray:
        reward, _ = self.rewards_and_counts()
        ranks = rankdata(-reward, method="min")
        decayed = self.decay**ranks * reward
        total = decayed.sum()
        if total <= 0.0:
            return np.full(len(reward), 1.0 / len(reward))
        return decayed / total


def frrmab_select(state: FrrmabState) -> str:
    if not state.window:
        return state.operators[int(state.rng.integers(len(state.operators)))]
    _, counts = state.rewards_and_counts()
    unused = np.flatnonzero(counts == 0)
    if len(unused):
        return state.operators[int(unused[0])]
    scores = state.frr() + state.scaling * np.sqrt(2.0 * math.log(counts.sum()) / counts)
    return state.operators[int(np.argmax(scores))]


def frrmab_credit(state: FrrmabState, operator: str, parent_tch: float, child_tch: float) -> float:
    fir = max((parent_tch - child_tch) / parent_tch, 0.0) if parent_tch > 0 else 0.0
    state.window.append((state.operators.index(operator), fir))
    return fir


class _FrrmabOperatorPolicy:
    def __init__(self, state: FrrmabState):
        self.state = state

    def select(self, subproblem: int) -> str:
        return frrmab_select(self.state)

    def credit(self, operator: str, parent_tch: float, child_tch: float) -> None:
        frrmab_credit(self.state, operator, parent_tch, child_tch)


class FrrmabController:
    """Static MOEA/D settings with the DE operator picked per offspring by FRRMAB."""

    def __init__(self, population_size: int = 210, seed=None):
        self.population_size = population_size
        self.seed = seed
        self.begin_episode()

    def begin_episode(self, env=None) -> None:
        N = env.state.N if env is not None and getattr(env, "state", None) is not None else self.population_size
        state = FrrmabState(math.floor(0.5 * N), rng=self.seed)
        self.operator_policy = _FrrmabOperatorPolicy(state)

    def act(self, obs, greedy: bool = True) -> JointAction:
        return JointAction("N", 20, "OP1", 0.5)


# --------------------------------------------------------------------------
# Interval-triggered weight adaptation


def awa_interval_action(t: int, T: int, base: JointAction = ORIGINAL_MOEAD) -> JointAction:
    """Request weight adaptation every ``ceil(T/20)`` generations, except in the last 10%."""
    interval = math.ceil(T / 20)
    adapt = t > 0 and t % interval == 0 and t <= 0.9 * T
    return JointAction("T" if adapt else "N", base.neighborhood_size, base.operator, base.scaling_factor)


class AwaController:
    def __init__(self, base: JointAction = ORIGINAL_MOEAD):
        self.base = base
        self.env = None

    def begin_episode(self, env=None) -> None:
        self.env = env

    def act(self, obs, greedy: bool = True) -> JointAction:
        if self.env is None:
            raise RuntimeError("AwaController needs begin_episode(env) before acting")
        return awa_interval_action(self.env.t, self.env.T, self.base)


BASELINES = ("moead", "moead-op1", "moead-op2", "moead-op3", "moead-op4", "ma-ucb", "frrmab", "awa")


def make_baseline(name: str, seed=None):
    name = name.lower()
    if name == "moead":
        return StaticController(ORIGINAL_MOEAD)
    if name.startswith("moead-op") and name[-1] in "1234":
        return StaticController(static_action(f"OP{name[-1]}"))
    if name == "ma-ucb":
        return MaUcbController()
    if name == "frrmab":
        return FrrmabController(seed=seed)
    if name == "awa":
        return AwaController()
    raise ValueError(f"unknown baseline {name!r}; expected one of {BASELINES}")
