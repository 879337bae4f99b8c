from .buffer import Batch, EpisodeBuffer, episode_batch
from .learner import MODES, Learner, epsilon_greedy, linear_epsilon, vdn_qtot

__all__ = [
    "MODES",
    "Batch",
    "EpisodeBuffer",
    "Learner",
    "episode_batch",
    "epsilon_greedy",
    "linear_epsilon",
    "vdn_qtot",
]
