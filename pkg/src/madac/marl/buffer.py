"""Replay storage for whole episodes or single transitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray

    def __len__(self) -> int:
        return len(self.rewards)

    @classmethod
    def concatenate(cls, parts: list[Batch]) -> Batch:
        return cls(
            np.concatenate([p.obs for p in parts]),
            np.concatenate([p.actions for p in parts]),
            np.concatenate([p.rewards for p in parts]),
            np.concatenate([p.next_obs for p in parts]),
            np.concatenate([p.dones for p in parts]),
        )


def episode_batch(obs, actions, rewards, dones) -> Batch:
    """Pack one episode; ``obs`` has one more row than there are steps."""
    obs = np.asarray(obs, dtype=float)
    return Batch(
        obs[:-1].copy(),
        np.asarray(actions, dtype=np.int64),
        np.asarray(rewards, dtype=float),
        obs[1:].copy(),
        np.asarray(dones, dtype=float),
    )


class EpisodeBuffer:
    """FIFO ring buffer whose storage unit is an episode or a transition.

    Episodes are only ever stored whole; with ``unit="transition"`` each
    stored episode is split and capacity counts transitions.
    """

    def __init__(self, capacity: int, unit: str = "episode"):
        if unit not in ("episode", "transition"):
            raise ValueError("unit must be 'episode' or 'transition'")
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.unit = unit
        self._items: list[Batch] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    def _push(self, item: Batch) -> None:
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._next] = item
        self._next = (self._next + 1) % self.capacity

    def add_episode(self, episode: Batch) -> None:
        if self.unit == "episode":
            self._push(episode)
            return
        for k in range(len(episode)):
            self._push(
                Batch(
                    episode.obs[k : k + 1],
                    episode.actions[k : k + 1],
                    episode.rewards[k : k + 1],
                    episode.next_obs[k : k + 1],
                    episode.dones[k : k + 1],
                )
            )

    def can_sample(self, batch_size: int) -> bool:
        return len(self._items) >= batch_size

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        """Uniformly choose ``batch_size`` distinct stored units."""
        if not self.can_sample(batch_size):
            raise ValueError(f"buffer holds {len(self)} units, cannot sample {batch_size}")
        idx = rng.choice(len(self._items), batch_size, replace=False)
        return Batch.concatenate([self._items[i] for i in idx])
