"""Sigmoid benchmark: each agent tracks an instance-specific sigmoid curve.

Agent ``j`` picks one of ``D_j`` discrete values per step; the choice is
read as ``a / (D_j - 1)`` in [0, 1] and compared with
``sig(t) = 1 / (1 + exp(-s_j (t - p_j)))``. The team reward is the product
over agents of ``1 - |sig(t) - a|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import RngStream, as_stream
from .actions import ProtocolError


def sig(t: float, slope: float, shift: float) -> float:
    return float(1.0 / (1.0 + np.exp(-slope * (t - shift))))


@dataclass(frozen=True)
class SigmoidInstance:
    slopes: tuple[float, ...]
    shifts: tuple[float, ...]


def sample_instance(dims: int, T: int, rng: RngStream) -> SigmoidInstance:
    slopes = rng.normal(0.0, 2.0, dims)
    shifts = rng.normal(T / 2.0, T / 4.0, dims)
    return SigmoidInstance(tuple(float(s) for s in slopes), tuple(float(p) for p in shifts))


class SigmoidEnv:
    def __init__(self, dims: int = 3, action_sizes=3, horizon: int = 10, seed: int | RngStream | None = 0):
        if dims < 1:
            raise ValueError("dims must be at least 1")
        if isinstance(action_sizes, int):
            action_sizes = (action_sizes,) * dims
        if len(action_sizes) != dims or min(action_sizes) < 1:
            raise ValueError("need one positive action size per dimension")
        self.dims = dims
        self.action_cardinalities = tuple(int(a) for a in action_sizes)
        self.n_agents = dims
        self.T = horizon
        self.obs_dim = 1 + 3 * dims
        self.rng = as_stream(seed)
        self.done = True
        self.instance: SigmoidInstance | None = None

    def reset(self, instance: SigmoidInstance | None = None) -> np.ndarray:
        self.instance = instance if instance is not None else sample_instance(self.dims, self.T, self.rng)
        self.t = 0
        self.prev = np.zeros(self.dims)
        self.done = False
        return self.observation()

    def observation(self) -> np.ndarray:
        inst = self.instance
        pairs = np.column_stack([inst.slopes, inst.shifts]).ravel()
        return np.concatenate([[(self.T - self.t) / self.T], pairs, self.prev])

    def normalized(self, actions) -> np.ndarray:
        out = np.empty(self.dims)
        for j, (a, card) in enumerate(zip(actions, self.action_cardinalities)):
            a = int(a)
            if not 0 <= a < card:
                raise ProtocolError(f"action {a} outside 0..{card - 1} for dimension {j}")
            out[j] = a / (card - 1) if card > 1 else 0.0
        return out

    def reward(self, t: int, normalized_actions: np.ndarray) -> float:
        inst = self.instance
        r = 1.0
        for a, s, p in zip(normalized_actions, inst.slopes, inst.shifts):
            r *= 1.0 - abs(sig(t, s, p) - a)
        return r

    def step(self, actions):
        if self.done:
            raise ProtocolError("step() called on a finished episode; call reset() first")
        if len(actions) != self.dims:
            raise ProtocolError(f"expected {self.dims} actions, got {len(actions)}")
        norm = self.normalized(actions)
        r = self.reward(self.t, norm)
        self.prev = norm
        self.t += 1
        self.done = self.t >= self.T
        return self.observation(), r, self.done, {}


def sigmoid_reset(dims: int, action_sizes=3, T: int = 10, seed: int | None = 0):
    env = SigmoidEnv(dims, action_sizes, T, seed)
    return env, env.reset()
