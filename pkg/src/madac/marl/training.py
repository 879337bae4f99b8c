"""Training loop: episodic rollouts, replay, TD updates, checkpoints."""

from __future__ import annotations

import csv
import json
import logging
import pickle
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..env.actions import ACTION_CARDINALITIES
from ..env.mamo import MamoEnv, make_spec
from ..env.sigmoid import SigmoidEnv, sample_instance
from ..nn import load_checkpoint, save_checkpoint
from ..rng import RngStream
from ..runner import LearnerPolicy, build_manifest, config_hash, drive_episode
from .buffer import EpisodeBuffer, episode_batch
from .learner import Learner, linear_epsilon

logger = logging.getLogger(__name__)

# Ablation defaults per MaMo agent: keep weights, Tn=20, OP2, F=0.5.
MASK_DEFAULTS = {1: 0, 2: 1, 3: 1, 4: 1}
LOG_FIELDS = ("step", "episode", "mean_return", "loss", "epsilon")


@dataclass
class TrainConfig:
    env: str = "mamo"
    learner: str = "vdn"
    train_set: list[str] = field(default_factory=lambda: ["DTLZ2_3", "WFG4_3", "WFG6_3"])
    steps: int = 400_000
    seed: int = 1
    hidden: list[int] | None = None
    lr: float | None = None
    gamma: float = 0.99
    batch_size: int = 32
    target_update: int = 200
    buffer_capacity: int | None = None
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_anneal: int = 50_000
    eval_interval: int = 10_000
    eval_episodes: int = 5
    checkpoint_interval: int = 0
    mask_agent: int | None = None
    # MaMo options
    population_size: int = 210
    horizon: int | None = None
    hv_samples: int = 10_000
    reward_mode: str = "madac"
    # Sigmoid options
    dims: int = 3
    action_size: int = 3
    sigmoid_horizon: int = 10

    def resolved(self) -> TrainConfig:
        """Fill learner-dependent defaults."""
        cfg = TrainConfig(**asdict(self))
        is_dqn = cfg.learner == "dqn"
        if cfg.hidden is None:
            if is_dqn:
                cfg.hidden = [128, 128, 128]
            else:
                cfg.hidden = [32, 32] if cfg.env == "sigmoid" else [64, 64]
        if cfg.lr is None:
            if is_dqn:
                cfg.lr = 3e-4
            else:
                cfg.lr = 5e-4 if cfg.env == "sigmoid" else 1e-4
        if cfg.buffer_capacity is None:
            cfg.buffer_capacity = 50_000 if is_dqn else 5_000
        return cfg


class TrainingEnv:
    """Uniform view of MaMo and Sigmoid for the training loop."""

    def __init__(self, cfg: TrainConfig, rng: RngStream):
        self.cfg = cfg
        self.rng = rng
        if cfg.env == "mamo":
            self.env = MamoEnv(hv_samples=cfg.hv_samples, reward_mode=cfg.reward_mode)
            self.cardinalities = ACTION_CARDINALITIES
            self.obs_dim = MamoEnv.obs_dim
        elif cfg.env == "sigmoid":
            self.env = SigmoidEnv(cfg.dims, cfg.action_size, cfg.sigmoid_horizon, rng.child())
            self.cardinalities = self.env.action_cardinalities
            self.obs_dim = self.env.obs_dim
        else:
            raise ValueError(f"unknown environment {cfg.env!r}")

    def reset(self) -> np.ndarray:
        """Start an episode on a uniformly sampled training instance."""
        if self.cfg.env == "sigmoid":
            return self.env.reset()
        name = self.cfg.train_set[int(self.rng.integers(len(self.cfg.train_set)))]
        seed = self.rng.integer_seed()
        return self.env.reset(make_spec(name, seed, self.cfg.horizon, self.cfg.population_size))

    def eval_contexts(self, count: int, rng: RngStream) -> list:
        if self.cfg.env == "sigmoid":
            return [sample_instance(self.cfg.dims, self.cfg.sigmoid_horizon, rng) for _ in range(count)]
        names = self.cfg.train_set
        return [
            make_spec(names[k % len(names)], rng.integer_seed(), self.cfg.horizon, self.cfg.population_size)
            for k in range(count)
        ]

    def reset_to(self, context) -> np.ndarray:
        return self.env.reset(context)


def make_learner(cfg: TrainConfig, obs_dim: int, cardinalities, rng) -> Learner:
    fixed = None
    if cfg.mask_agent is not None:
        if cfg.env != "mamo" or cfg.mask_agent not in MASK_DEFAULTS:
            raise ValueError("--mask-agent takes 1..4 and applies to the MaMo environment")
        fixed = {cfg.mask_agent - 1: MASK_DEFAULTS[cfg.mask_agent]}
    return Learner(
        cfg.learner,
        obs_dim,
        cardinalities,
        hidden=cfg.hidden,
        lr=cfg.lr,
        gamma=cfg.gamma,
        target_update=cfg.target_update,
        rng=rng,
        fixed_actions=fixed,
    )


def greedy_return(learner: Learner, tenv: TrainingEnv, contexts: list) -> float:
    policy = LearnerPolicy(learner, np.random.default_rng(0))
    returns = [drive_episode(tenv.env, policy, tenv.reset_to(c)).total_return for c in contexts]
    return float(np.mean(returns))


# --------------------------------------------------------------------------
# Checkpoints


def write_checkpoint(directory: Path, learner: Learner, cfg: TrainConfig, step: int) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for j, net in enumerate(learner.nets):
        name = f"net{j}.bin"
        save_checkpoint(directory / name, net, seed=cfg.seed, step=step)
        files.append(name)
    manifest = {
        "mode": learner.mode,
        "env": cfg.env,
        "obs_dim": learner.obs_dim,
        "cardinalities": list(learner.cardinalities),
        "hidden": list(learner.hidden),
        "fixed_actions": {str(k): v for k, v in learner.fixed_actions.items()},
        "networks": files,
        "step": step,
        "config_hash": config_hash(asdict(cfg)),
        "config": asdict(cfg),
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_learner(directory: str | Path) -> tuple[Learner, dict]:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no checkpoint manifest in {directory}")
    manifest = json.loads(manifest_path.read_text())
    learner = Learner(
        manifest["mode"],
        manifest["obs_dim"],
        manifest["cardinalities"],
        hidden=manifest["hidden"],
        fixed_actions={int(k): v for k, v in manifest["fixed_actions"].items()},
    )
    if len(manifest["networks"]) != len(learner.nets):
        raise ValueError("checkpoint manifest lists the wrong number of networks")
    for j, name in enumerate(manifest["networks"]):
        net, _ = load_checkpoint(directory / name)
        if net.widths != learner.nets[j].widths:
            raise ValueError(f"network {name} has widths {net.widths}, manifest implies {learner.nets[j].widths}")
        learner.nets[j].load_params(net.params)
    learner.sync_targets()
    return learner, manifest


# --------------------------------------------------------------------------
# Main loop


@dataclass
class TrainingResult:
    learner: Learner
    log: list[dict]
    steps: int
    episodes: int


def run_training(config: TrainConfig, out_dir: str | Path | None = None, resume: bool = False) -> TrainingResult:
    """Train a learner; writes a checkpoint, a CSV log and resume state to ``out_dir``."""
    cfg = config.resolved()
    out = Path(out_dir) if out_dir is not None else None
    root = RngStream(cfg.seed)
    env_rng, learner_rng, explore_rng, sample_rng, eval_rng = root.spawn(5)
    tenv = TrainingEnv(cfg, env_rng)
    learner = make_learner(cfg, tenv.obs_dim, tenv.cardinalities, learner_rng.generator)
    unit = "transition" if cfg.learner == "dqn" else "episode"
    buffer = EpisodeBuffer(cfg.buffer_capacity, unit)
    eval_contexts = tenv.eval_contexts(cfg.eval_episodes, eval_rng) if cfg.eval_episodes > 0 else []

    steps = episodes = 0
    log: list[dict] = []
    losses: list[float] = []
    next_eval = cfg.eval_interval
    next_ckpt = cfg.checkpoint_interval

    state_file = out / "resume.pkl" if out is not None else None
    if resume and state_file is not None and state_file.exists():
        with open(state_file, "rb") as fh:
            saved = pickle.load(fh)
        learner, buffer = saved["learner"], saved["buffer"]
        steps, episodes, log = saved["steps"], saved["episodes"], saved["log"]
        next_eval, next_ckpt, losses = saved["next_eval"], saved["next_ckpt"], saved["losses"]
        for stream, st in zip((env_rng, explore_rng, sample_rng), saved["rng_states"]):
            stream.set_state(st)
        if cfg.env == "sigmoid":
            tenv.env.rng.set_state(saved["sigmoid_rng"])
        logger.info("resumed from %s at step %d", state_file, steps)

    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(asdict(cfg), indent=2, sort_keys=True))
        seeds = {"root": cfg.seed}
        (out / "manifest.json").write_text(json.dumps(build_manifest(asdict(cfg), seeds), indent=2, sort_keys=True))

    def save_resume() -> None:
        if state_file is None:
            return
        rng_states = [s.get_state() for s in (env_rng, explore_rng, sample_rng)]
        saved = {
            "learner": learner,
            "buffer": buffer,
            "steps": steps,
            "episodes": episodes,
            "log": log,
            "next_eval": next_eval,
            "next_ckpt": next_ckpt,
            "losses": losses,
            "rng_states": rng_states,
            "sigmoid_rng": tenv.env.rng.get_state() if cfg.env == "sigmoid" else None,
        }
        tmp = state_file.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            pickle.dump(saved, fh)
        tmp.replace(state_file)

    gen = explore_rng.generator
    while steps < cfg.steps:
        obs = tenv.reset()
        obs_list, acts, rews, dones = [obs], [], [], []
        done = False
        while not done:
            eps = linear_epsilon(steps, cfg.eps_start, cfg.eps_end, cfg.eps_anneal)
            action = learner.act(obs, eps, gen)
            obs, reward, done, _ = tenv.env.step(action)
            obs_list.append(obs)
            acts.append(action)
            rews.append(reward)
            dones.append(float(done))
            steps += 1
            if unit == "transition":
                buffer.add_episode(episode_batch(obs_list[-2:], acts[-1:], rews[-1:], dones[-1:]))
                if buffer.can_sample(cfg.batch_size):
                    losses.append(learner.td_train_step(buffer.sample(cfg.batch_size, sample_rng.generator)))
        episodes += 1
        if unit == "episode":
            buffer.add_episode(episode_batch(obs_list, acts, rews, dones))
            if buffer.can_sample(cfg.batch_size):
                losses.append(learner.td_train_step(buffer.sample(cfg.batch_size, sample_rng.generator)))

        final = steps >= cfg.steps
        if eval_contexts and (steps >= next_eval or final):
            mean_ret = greedy_return(learner, tenv, eval_contexts)
            eps = linear_epsilon(steps, cfg.eps_start, cfg.eps_end, cfg.eps_anneal)
            row = {
                "step": steps,
                "episode": episodes,
                "mean_return": mean_ret,
                "loss": float(np.mean(losses)) if losses else float("nan"),
                "epsilon": eps,
            }
            log.append(row)
            losses = []
            logger.info("step %d episode %d greedy return %.5f", steps, episodes, mean_ret)
            while next_eval <= steps:
                next_eval += max(1, cfg.eval_interval)
        if out is not None and cfg.checkpoint_interval > 0 and steps >= next_ckpt and not final:
            write_checkpoint(out / "checkpoint", learner, cfg, steps)
            save_resume()
            while next_ckpt <= steps:
                next_ckpt += cfg.checkpoint_interval

    if out is not None:
        write_checkpoint(out / "checkpoint", learner, cfg, steps)
        write_training_log(out / "train_log.csv", log)
        save_resume()
    return TrainingResult(learner, log, steps, episodes)


def write_training_log(path: Path, log: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LOG_FIELDS)
        writer.writeheader()
        for row in log:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
