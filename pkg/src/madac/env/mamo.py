"""MaMo: MOEA/D as a cooperative multi-agent environment.

One environment step is one MOEA/D generation. Four agents choose, each
generation, whether to adapt the weights, the neighborhood size, the DE
operator and its scaling factor; they share a single team reward.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist

from .. import indicators
from ..moead import (
    DecompositionState,
    adapt_weights,
    initialize_state,
    step_generation,
    weight_adaptation_allowed,
)
from ..problems import MopInstance, parse_instance, sample_reference_front
from ..rng import RngStream
from .actions import ACTION_CARDINALITIES, JointAction, ProtocolError
from .reward import RewardState, alt_reward, compute_reward

OBS_DIM = 22
REWARD_MODES = ("madac", "R1", "R2", "R3")
LOG_FIELDS = ("t", "a1", "a2", "a3", "a4", "reward", "igd", "hv", "nd_ratio", "dist")


@dataclass(frozen=True)
class EpisodeSpec:
    instance: MopInstance
    seed: int
    T: int | None = None
    N: int = 210

    @property
    def horizon(self) -> int:
        return self.T if self.T is not None else 100 * self.instance.m


@dataclass
class IndicatorHistory:
    """Per-step indicator values; index 0 holds the initial population."""

    hv: list[float] = field(default_factory=list)
    nd_ratio: list[float] = field(default_factory=list)
    dist: list[float] = field(default_factory=list)

    def append(self, hv: float, nd: float, dist: float) -> None:
        self.hv.append(hv)
        self.nd_ratio.append(nd)
        self.dist.append(dist)


def _window(values: list[float], length: int) -> np.ndarray:
    tail = values[-length:]
    return np.concatenate([np.zeros(length - len(tail)), tail])


def compute_state_features(
    m: int, D: int, t: int, T: int, n_stag: int, history: IndicatorHistory
) -> np.ndarray:
    """The 22 state features in table order.

    Values before the first step count as zero, both for the change features
    and for padding the last-five window.
    """
    obs = np.empty(OBS_DIM)
    obs[0] = 1.0 / m
    obs[1] = 1.0 / D
    obs[2] = t / T
    obs[3] = n_stag / T
    series = (history.hv, history.nd_ratio, history.dist)
    for j, values in enumerate(series):
        current = values[-1]
        previous = values[-2] if len(values) > 1 else 0.0
        last5 = _window(values, 5)
        everything = np.asarray(values)
        obs[4 + j] = current
        obs[7 + j] = current - previous
        obs[10 + j] = last5.mean()
        obs[13 + j] = last5.std()
        obs[16 + j] = everything.mean()
        obs[19 + j] = everything.std()
    return obs


class MamoEnv:
    """Contextual multi-agent MDP over a MOEA/D run."""

    n_agents = 4
    action_cardinalities = ACTION_CARDINALITIES
    obs_dim = OBS_DIM

    def __init__(
        self,
        hv_samples: int = indicators.DEFAULT_HV_SAMPLES,
        reward_mode: str = "madac",
        distance_samples: int = 1000,
        reference_size: int | None = None,
    ):
        if reward_mode not in REWARD_MODES:
            raise ValueError(f"reward mode must be one of {REWARD_MODES}")
        self.hv_samples = hv_samples
        self.reward_mode = reward_mode
        self.distance_samples = distance_samples
        self.reference_size = reference_size
        self.state: DecompositionState | None = None
        self.done = True
        self.log: list[dict] = []

    # -- episode control ---------------------------------------------------

    def reset(self, spec: EpisodeSpec) -> np.ndarray:
        inst = spec.instance
        self.spec = spec
        self.instance = inst
        self.T = spec.horizon
        engine_rng, scale_rng, hv_rng = RngStream(spec.seed).spawn(3)
        self.state = initialize_state(inst, spec.N, engine_rng)
        self.reference = sample_reference_front(inst, self.reference_size)
        self._hv_seed = hv_rng.integer_seed()

        Xs = inst.lower + scale_rng.random((self.distance_samples, inst.D)) * (inst.upper - inst.lower)
        Fs = indicators.normalize(np.array([inst.evaluate(x) for x in Xs]), inst.ideal, inst.nadir)
        self.distance_scale = float(pdist(Fs).max())

        self.t = 0
        self.n_stag = 0
        self.history = IndicatorHistory()
        self.history.append(*self._indicators())
        self.igd = indicators.igd(self.reference, self.state.F)
        self.igd_curve = [self.igd]
        self.reward_state = RewardState.start(self.igd)
        self.done = False
        self.log = []
        return self.observation()

    def observation(self) -> np.ndarray:
        inst = self.instance
        return compute_state_features(inst.m, inst.D, self.t, self.T, self.n_stag, self.history)

    def _indicators(self) -> tuple[float, float, float]:
        m = self.instance.m
        Fn = self.state.normalized(self.state.F)
        ref = np.full(m, indicators.HV_REFERENCE)
        hv = indicators.hypervolume(
            Fn, ref, self.hv_samples, seed=self._hv_seed, lower=np.zeros(m)
        ) / float(np.prod(ref))
        nd = indicators.nd_ratio(Fn)
        dist = indicators.avg_distance(Fn, self.distance_scale)
        return hv, nd, dist

    def step(self, action, operator_policy=None):
        """Advance one generation; returns ``(obs, reward, done, info)``."""
        if self.done or self.state is None:
            raise ProtocolError("step() called on a finished episode; call reset() first")
        if not isinstance(action, JointAction):
            action = JointAction.from_indices(action)

        adapted = False
        if action.weights == "T" and weight_adaptation_allowed(
            self.t, self.T, self.state.last_weight_adapt_step
        ):
            adapt_weights(self.state)
            self.state.last_weight_adapt_step = self.t
            adapted = True
        stats = step_generation(self.state, action.generation_config(), operator_policy=operator_policy)
        self.t += 1

        hv, nd, dist = self._indicators()
        if hv <= self.history.hv[-1]:
            self.n_stag += 1
        self.history.append(hv, nd, dist)

        f_prev = self.igd
        igd_new = indicators.igd(self.reference, self.state.F)
        f_best = self.reward_state.f_best
        team_reward, self.reward_state = compute_reward(igd_new, self.reward_state)
        if self.reward_mode == "madac":
            reward = team_reward
        else:
            reward = alt_reward(self.reward_mode, f_prev, igd_new, f_best)
        self.igd = igd_new
        self.igd_curve.append(igd_new)
        self.done = self.t >= self.T

        row = {
            "t": self.t,
            "a1": action.weights,
            "a2": action.neighborhood_size,
            "a3": action.operator,
            "a4": action.scaling_factor,
            "reward": reward,
            "igd": igd_new,
            "hv": hv,
            "nd_ratio": nd,
            "dist": dist,
        }
        self.log.append(row)
        info = {
            "igd": igd_new,
            "team_reward": team_reward,
            "adapted": adapted,
            "replacements": stats.replacements,
        }
        return self.observation(), reward, self.done, info

    def write_log(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=LOG_FIELDS)
            writer.writeheader()
            for row in self.log:
                writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def make_spec(instance: str | MopInstance, seed: int, T: int | None = None, N: int = 210) -> EpisodeSpec:
    if isinstance(instance, str):
        instance = parse_instance(instance)
    if T is not None and T < 1:
        raise ValueError("horizon must be positive")
    return EpisodeSpec(instance, int(seed), T, N)


def default_horizon(m: int) -> int:
    return 100 * m
