"""Command-line entry point: ``train``, ``eval``, ``table`` and ``curves``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import BASELINES, make_baseline
from .env.mamo import MamoEnv, make_spec
from .env.sigmoid import SigmoidEnv, sample_instance
from .marl.training import TrainConfig, load_learner, run_training
from .problems import parse_instance
from .rng import RngStream
from .runner import LearnerPolicy, build_manifest, drive_episode
from .stats import RunResult, read_results, summarize, write_results

logger = logging.getLogger("madac")

TRAIN_DEFAULTS = asdict(TrainConfig())
TRAIN_DEFAULTS.update(out="runs/train", objectives=None, resume=False)

EVAL_DEFAULTS = {
    "env": "mamo",
    "baseline": None,
    "checkpoint": None,
    "instances": ["DTLZ2_3"],
    "runs": 30,
    "seed": 0,
    "population_size": 210,
    "horizon": None,
    "hv_samples": 10_000,
    "reward_mode": "madac",
    "dims": 3,
    "action_size": 3,
    "sigmoid_horizon": 10,
    "out": "runs/eval",
}


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in _csv_list(text)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="madac", description="Multi-agent dynamic configuration of MOEA/D.")
    parser.add_argument("--version", action="version", version=f"madac {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    tr = sub.add_parser("train", help="train a learner", argument_default=S)
    tr.add_argument("--config", help="JSON file of settings; flags override it")
    tr.add_argument("--env", choices=["mamo", "sigmoid"])
    tr.add_argument("--train-set", type=_csv_list, help="comma separated instances, e.g. DTLZ2_3,WFG4_3")
    tr.add_argument("--objectives", type=_int_list, help="expand train-set families over these objective counts")
    tr.add_argument("--learner", choices=["vdn", "iql", "dqn"])
    tr.add_argument("--steps", type=int)
    tr.add_argument("--seed", type=int)
    tr.add_argument("--hidden", type=_int_list)
    tr.add_argument("--lr", type=float)
    tr.add_argument("--gamma", type=float)
    tr.add_argument("--batch-size", type=int)
    tr.add_argument("--target-update", type=int)
    tr.add_argument("--buffer-capacity", type=int)
    tr.add_argument("--eps-anneal", type=int)
    tr.add_argument("--eval-interval", type=int)
    tr.add_argument("--eval-episodes", type=int)
    tr.add_argument("--checkpoint-interval", type=int)
    tr.add_argument("--mask-agent", type=int, choices=[1, 2, 3, 4])
    tr.add_argument("--population-size", type=int)
    tr.add_argument("--horizon", type=int, help="MaMo generations per episode (default 100m)")
    tr.add_argument("--hv-samples", type=int)
    tr.add_argument("--reward-mode")
    tr.add_argument("--dims", type=int)
    tr.add_argument("--action-size", type=int)
    tr.add_argument("--sigmoid-horizon", type=int)
    tr.add_argument("--out", help="output directory")
    tr.add_argument("--resume", action="store_true", help="continue from the saved state in --out")

    ev = sub.add_parser("eval", help="evaluate a checkpoint or baseline", argument_default=S)
    ev.add_argument("--config")
    ev.add_argument("--env", choices=["mamo", "sigmoid"])
    who = ev.add_mutually_exclusive_group()
    who.add_argument("--baseline", choices=BASELINES)
    who.add_argument("--checkpoint", help="checkpoint directory written by train")
    ev.add_argument("--instances", type=_csv_list)
    ev.add_argument("--runs", type=int)
    ev.add_argument("--seed", type=int, help="run r uses seed + r")
    ev.add_argument("--population-size", type=int)
    ev.add_argument("--horizon", type=int)
    ev.add_argument("--hv-samples", type=int)
    ev.add_argument("--reward-mode")
    ev.add_argument("--dims", type=int)
    ev.add_argument("--action-size", type=int)
    ev.add_argument("--sigmoid-horizon", type=int)
    ev.add_argument("--out")

    tb = sub.add_parser("table", help="compare result files")
    tb.add_argument("results", nargs="+", help="JSON-lines result files")
    tb.add_argument("--reference", help="method every other column is tested against (default: last)")
    tb.add_argument("--alpha", type=float, default=0.05)
    tb.add_argument("--csv", help="also write the table as CSV")

    cv = sub.add_parser("curves", help="export per-step curves as long-format CSV")
    cv.add_argument("results", nargs="+")
    cv.add_argument("--out", required=True)
    cv.add_argument("--mean", action="store_true", help="one row per method, instance and step with mean/std")
    return parser


def resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(defaults)
    given = vars(args).copy()
    path = given.pop("config", None)
    for key in ("command", "verbose"):
        given.pop(key, None)
    if path is not None:
        data = json.loads(Path(path).read_text())
        unknown = set(data) - set(defaults)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    cfg.update(given)
    return cfg


def _write_resolved(out: Path, cfg: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    payload = {"version": __version__, "config": cfg}
    (out / "resolved_config.json").write_text(json.dumps(payload, indent=2, sort_keys=True))


# --------------------------------------------------------------------------
# Commands


def cmd_train(args) -> int:
    cfg = resolve(args, TRAIN_DEFAULTS)
    out = Path(cfg.pop("out"))
    objectives = cfg.pop("objectives")
    resume = cfg.pop("resume")
    if objectives:
        families = list(dict.fromkeys(name.split("_")[0] for name in cfg["train_set"]))
        cfg["train_set"] = [f"{fam}_{m}" for m in objectives for fam in families]
    if cfg["env"] == "mamo":
        for name in cfg["train_set"]:
            parse_instance(name)
    print(f"train: out={out} seed={cfg['seed']}", flush=True)
    _write_resolved(out, {**cfg, "out": str(out)})
    run_training(TrainConfig(**cfg), out, resume=resume)
    print(f"checkpoint: {out / 'checkpoint'}", flush=True)
    return 0


def _sigmoid_runs(policy, cfg: dict, method: str) -> list[RunResult]:
    env = SigmoidEnv(cfg["dims"], cfg["action_size"], cfg["sigmoid_horizon"], seed=0)
    results = []
    for r in range(cfg["runs"]):
        seed = cfg["seed"] + r
        inst = sample_instance(cfg["dims"], cfg["sigmoid_horizon"], RngStream(seed))
        traj = drive_episode(env, policy, env.reset(inst))
        curve = [float(v) for v in np.cumsum(traj.rewards)]
        results.append(RunResult(method, "sigmoid", seed, curve[-1], curve, metric="return"))
    return results


def _mamo_runs(policy_factory, cfg: dict, method: str) -> list[RunResult]:
    env = MamoEnv(hv_samples=cfg["hv_samples"], reward_mode=cfg["reward_mode"])
    results = []
    for name in cfg["instances"]:
        for r in range(cfg["runs"]):
            seed = cfg["seed"] + r
            policy = policy_factory(seed)
            drive_episode(env, policy, env.reset(make_spec(name, seed, cfg["horizon"], cfg["population_size"])))
            curve = [float(v) for v in env.igd_curve[1:]]
            results.append(RunResult(method, name, seed, curve[-1], curve))
            logger.info("%s %s seed %d final IGD %.6e", method, name, seed, curve[-1])
    return results


def cmd_eval(args) -> int:
    cfg = resolve(args, EVAL_DEFAULTS)
    out = Path(cfg["out"])
    if (cfg["baseline"] is None) == (cfg["checkpoint"] is None):
        raise ValueError("give exactly one of --baseline or --checkpoint")
    if cfg["runs"] < 1:
        raise ValueError("--runs must be positive")
    print(f"eval: out={out} seeds={cfg['seed']}..{cfg['seed'] + cfg['runs'] - 1}", flush=True)
    _write_resolved(out, cfg)

    if cfg["checkpoint"] is not None:
        learner, manifest = load_learner(cfg["checkpoint"])
        if manifest["env"] != cfg["env"]:
            raise ValueError(f"checkpoint was trained on {manifest['env']!r}, not {cfg['env']!r}")
        method = f"{manifest['mode']}:{Path(cfg['checkpoint']).resolve().parent.name}"
        policy = LearnerPolicy(learner, np.random.default_rng(0))
        factory = lambda seed: policy  # noqa: E731
    else:
        if cfg["env"] != "mamo":
            raise ValueError("baselines run on the MaMo environment only")
        method = cfg["baseline"]
        factory = lambda seed: make_baseline(method, seed)  # noqa: E731

    if cfg["env"] == "sigmoid":
        results = _sigmoid_runs(factory(cfg["seed"]), cfg, method)
    else:
        for name in cfg["instances"]:
            parse_instance(name)
        results = _mamo_runs(factory, cfg, method)
    write_results(out / "results.jsonl", results)
    manifest = build_manifest(cfg, {"seeds": [cfg["seed"] + r for r in range(cfg["runs"])]})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    print(f"results: {out / 'results.jsonl'} ({len(results)} records)", flush=True)
    return 0


def _load_all(paths) -> list[RunResult]:
    results = []
    for p in paths:
        results.extend(read_results(p))
    return results


def cmd_table(args) -> int:
    results = _load_all(args.results)
    table = summarize(results, reference=args.reference, alpha=args.alpha)
    if len(table.methods) < 2:
        raise ValueError("a comparison table needs at least two methods")
    sys.stdout.write(table.to_text())
    if args.csv:
        table.to_csv(args.csv)
    return 0


def cmd_curves(args) -> int:
    results = _load_all(args.results)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        if not args.mean:
            writer.writerow(["method", "instance", "seed", "step", "metric", "value"])
            for r in results:
                for t, v in enumerate(r.curve, start=1):
                    writer.writerow([r.method, r.instance, r.seed, t, r.metric, repr(v)])
            return 0
        writer.writerow(["method", "instance", "step", "metric", "mean", "std", "runs"])
        groups: dict[tuple[str, str, str], list[list[float]]] = {}
        for r in results:
            groups.setdefault((r.method, r.instance, r.metric), []).append(r.curve)
        for (method, inst, metric), curves in groups.items():
            length = min(len(c) for c in curves)
            arr = np.array([c[:length] for c in curves])
            for t in range(length):
                col = arr[:, t]
                writer.writerow([method, inst, t + 1, metric, repr(float(col.mean())), repr(float(col.std())), len(col)])
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "table": cmd_table, "curves": cmd_curves}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
