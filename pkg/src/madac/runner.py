"""Episode driver and run manifests shared by training, evaluation and baselines."""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np

from . import __version__
from .env.actions import JointAction, ProtocolError


class Policy(Protocol):
    def act(self, obs: np.ndarray, greedy: bool = True): ...


@dataclass
class Trajectory:
    observations: list[np.ndarray] = field(default_factory=list)
    actions: list[tuple] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    infos: list[dict] = field(default_factory=list)

    @property
    def total_return(self) -> float:
        return float(sum(self.rewards))

    def __len__(self) -> int:
        return len(self.rewards)


def _validate(env, action):
    if isinstance(action, JointAction):
        return action
    action = tuple(int(a) for a in action)
    cards = env.action_cardinalities
    if len(action) != len(cards) or any(not 0 <= a < c for a, c in zip(action, cards)):
        raise ProtocolError(f"action {action} outside the domains {cards}")
    return action


def drive_episode(env, policy, obs: np.ndarray, greedy: bool = True) -> Trajectory:
    """Run ``policy`` on an already reset ``env`` until the episode ends.

    Policies may expose ``begin_episode()``, ``observe(reward)`` (bandits
    learning online) and an ``operator_policy`` for per-offspring operator
    selection; all are optional.
    """
    traj = Trajectory(observations=[obs])
    if hasattr(policy, "begin_episode"):
        policy.begin_episode(env)
    operator_policy = getattr(policy, "operator_policy", None)
    done = False
    while not done:
        action = _validate(env, policy.act(obs, greedy=greedy))
        if operator_policy is not None:
            obs, reward, done, info = env.step(action, operator_policy=operator_policy)
        else:
            obs, reward, done, info = env.step(action)
        if hasattr(policy, "observe"):
            policy.observe(reward)
        traj.observations.append(obs)
        traj.actions.append(action)
        traj.rewards.append(float(reward))
        traj.infos.append(info)
    return traj


class LearnerPolicy:
    """Adapter exposing a learner as an epsilon-greedy policy."""

    def __init__(self, learner, rng: np.random.Generator, epsilon: float = 0.0):
        self.learner = learner
        self.rng = rng
        self.epsilon = epsilon

    def act(self, obs, greedy: bool = True):
        if greedy:
            return self.learner.act_greedy(obs)
        return self.learner.act(obs, self.epsilon, self.rng)


def config_hash(config: dict[str, Any]) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_manifest(config: dict[str, Any], seeds: dict[str, Any] | None = None) -> dict[str, Any]:
    return {
        "package": "madac",
        "version": __version__,
        "config_hash": config_hash(config),
        "seeds": seeds or {},
        "rng": "PCG64/SeedSequence",
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
