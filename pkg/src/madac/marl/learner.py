"""Value-based learners: VDN, independent Q-learning and joint-action DQN."""

from __future__ import annotations

import math

import numpy as np

from ..env.actions import decode_joint, encode_joint
from ..nn import Mlp, OptimizerState, adam_step
from .buffer import Batch

MODES = ("vdn", "iql", "dqn")


def vdn_qtot(chosen_qs) -> float:
    """Team value as the plain sum of per-agent values (agent order)."""
    total = 0.0
    for q in chosen_qs:
        total += q
    return total


def epsilon_greedy(qs, eps: float, rng: np.random.Generator) -> int:
    if not 0.0 <= eps <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    qs = np.asarray(qs)
    if eps > 0.0 and rng.random() < eps:
        return int(rng.integers(len(qs)))
    return int(np.argmax(qs))


def linear_epsilon(step: int, start: float = 1.0, end: float = 0.05, anneal_steps: int = 50_000) -> float:
    if anneal_steps <= 0:
        return end
    frac = min(1.0, step / anneal_steps)
    return start + frac * (end - start)


class Learner:
    """Q-networks for a team of agents with discrete, heterogeneous actions.

    ``vdn`` and ``iql`` keep one network per agent (no parameter sharing);
    ``dqn`` uses a single network over the mixed-radix joint action space.
    ``fixed_actions`` pins chosen agents to a constant action index.
    """

    def __init__(
        self,
        mode: str,
        obs_dim: int,
        cardinalities,
        hidden=(64, 64),
        lr: float = 1e-4,
        gamma: float = 0.99,
        target_update: int = 200,
        rng=None,
        fixed_actions: dict[int, int] | None = None,
    ):
        mode = mode.lower()
        if mode not in MODES:
            raise ValueError(f"learner mode must be one of {MODES}")
        if not 0.0 <= gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        self.mode = mode
        self.obs_dim = obs_dim
        self.cardinalities = tuple(int(c) for c in cardinalities)
        self.n_agents = len(self.cardinalities)
        self.hidden = tuple(hidden)
        self.gamma = gamma
        self.target_update = target_update
        self.fixed_actions = dict(fixed_actions or {})
        self.train_steps = 0
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        if mode == "dqn":
            outputs = [math.prod(self.cardinalities)]
        else:
            outputs = list(self.cardinalities)
        self.nets = [Mlp.initialized((obs_dim, *self.hidden, out), gen) for out in outputs]
        self.targets = [net.copy() for net in self.nets]
        self.opts = [OptimizerState(net.n_params, lr=lr) for net in self.nets]

    # -- acting ------------------------------------------------------------

    def q_values(self, agent: int, obs) -> np.ndarray:
        if self.mode == "dqn":
            raise ValueError("DQN has a single joint network; use joint_q_values")
        return self.nets[agent].forward(obs)

    def joint_q_values(self, obs) -> np.ndarray:
        if self.mode != "dqn":
            raise ValueError("joint_q_values is only defined for DQN")
        return self.nets[0].forward(obs)

    def _apply_fixed(self, actions: list[int]) -> tuple[int, ...]:
        for agent, idx in self.fixed_actions.items():
            actions[agent] = idx
        return tuple(actions)

    def act(self, obs, eps: float, rng: np.random.Generator) -> tuple[int, ...]:
        if self.mode == "dqn":
            code = epsilon_greedy(self.joint_q_values(obs), eps, rng)
            return self._apply_fixed(list(decode_joint(code, self.cardinalities)))
        actions = [epsilon_greedy(self.q_values(j, obs), eps, rng) for j in range(self.n_agents)]
        return self._apply_fixed(actions)

    def act_greedy(self, obs) -> tuple[int, ...]:
        if self.mode == "dqn":
            code = int(np.argmax(self.joint_q_values(obs)))
            return self._apply_fixed(list(decode_joint(code, self.cardinalities)))
        return self._apply_fixed([int(np.argmax(self.q_values(j, obs))) for j in range(self.n_agents)])

    # -- learning ----------------------------------------------------------

    def sync_targets(self) -> None:
        for net, target in zip(self.nets, self.targets):
            target.load_params(net.params)

    def _next_values(self, agent: int, next_obs: np.ndarray) -> np.ndarray:
        q = self.targets[agent].forward(next_obs)
        if agent in self.fixed_actions and self.mode != "dqn":
            return q[:, self.fixed_actions[agent]]
        return q.max(axis=1)

    def td_train_step(self, batch: Batch) -> float:
        """One gradient step on the mean squared TD error; returns the loss."""
        B = len(batch)
        if B == 0:
            raise ValueError("empty batch")
        not_done = 1.0 - batch.dones
        if self.mode == "vdn":
            loss = self._train_vdn(batch, not_done)
        elif self.mode == "iql":
            loss = self._train_iql(batch, not_done)
        else:
            loss = self._train_dqn(batch, not_done)
        if not math.isfinite(loss):
            raise FloatingPointError(f"non-finite TD loss at train step {self.train_steps}")
        self.train_steps += 1
        if self.target_update > 0 and self.train_steps % self.target_update == 0:
            self.sync_targets()
        return loss

    def _train_vdn(self, batch: Batch, not_done: np.ndarray) -> float:
        B = len(batch)
        rows = np.arange(B)
        outs, caches = [], []
        q_tot = np.zeros(B)
        next_tot = np.zeros(B)
        for j, net in enumerate(self.nets):
            out, cache = net.forward_cached(batch.obs)
            outs.append(out)
            caches.append(cache)
            q_tot += out[rows, batch.actions[:, j]]
            next_tot += self._next_values(j, batch.next_obs)
        y = batch.rewards + self.gamma * not_done * next_tot
        err = q_tot - y
        d_qtot = 2.0 * err / B
        for j, net in enumerate(self.nets):
            g = np.zeros_like(outs[j])
            g[rows, batch.actions[:, j]] = d_qtot
            adam_step(net.params, net.backward(batch.obs, g, caches[j]), self.opts[j])
        return float(np.mean(err * err))

    def _train_iql(self, batch: Batch, not_done: np.ndarray) -> float:
        B = len(batch)
        rows = np.arange(B)
        losses = []
        for j, net in enumerate(self.nets):
            out, cache = net.forward_cached(batch.obs)
            y = batch.rewards + self.gamma * not_done * self._next_values(j, batch.next_obs)
            err = out[rows, batch.actions[:, j]] - y
            g = np.zeros_like(out)
            g[rows, batch.actions[:, j]] = 2.0 * err / B
            adam_step(net.params, net.backward(batch.obs, g, cache), self.opts[j])
            losses.append(float(np.mean(err * err)))
        return float(np.mean(losses))

    def _train_dqn(self, batch: Batch, not_done: np.ndarray) -> float:
        B = len(batch)
        rows = np.arange(B)
        codes = np.array([encode_joint(a, self.cardinalities) for a in batch.actions])
        net = self.nets[0]
        out, cache = net.forward_cached(batch.obs)
        y = batch.rewards + self.gamma * not_done * self.targets[0].forward(batch.next_obs).max(axis=1)
        err = out[rows, codes] - y
        g = np.zeros_like(out)
        g[rows, codes] = 2.0 * err / B
        adam_step(net.params, net.backward(batch.obs, g, cache), self.opts[0])
        return float(np.mean(err * err))

    def q_tot(self, obs, actions) -> float:
        """VDN team value of one joint action."""
        return vdn_qtot(float(self.q_values(j, obs)[a]) for j, a in enumerate(actions))
