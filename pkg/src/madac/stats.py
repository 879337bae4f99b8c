"""Run records, rank-sum significance labels and comparison tables."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm, rankdata

EXACT_LIMIT = 8
GAP = "--"
SYMBOLS = {"superior": "+", "inferior": "-", "equivalent": "≈"}


@dataclass
class RunResult:
    method: str
    instance: str
    seed: int
    final_igd: float
    curve: list[float] = field(default_factory=list)
    metric: str = "igd"

    def __post_init__(self):
        if self.curve and self.curve[-1] != self.final_igd:
            raise ValueError("final_igd must equal the last curve entry")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> RunResult:
        return cls(d["method"], d["instance"], int(d["seed"]), float(d["final_igd"]), list(d.get("curve", [])), d.get("metric", "igd"))


def write_results(path: str | Path, results: list[RunResult]) -> None:
    """One JSON record per line."""
    with open(path, "w") as fh:
        for r in results:
            fh.write(r.to_json() + "\n")


def read_results(path: str | Path) -> list[RunResult]:
    with open(path) as fh:
        return [RunResult.from_dict(json.loads(line)) for line in fh if line.strip()]


# --------------------------------------------------------------------------
# Rank-sum test


def _exact_pvalue(ranks: np.ndarray, n1: int, w: float) -> float:
    """Two-sided p from enumerating every split of the pooled ranks."""
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    target = int(round(2.0 * w))
    sums = np.array([doubled[list(c)].sum() for c in itertools.combinations(range(len(ranks)), n1)])
    lower = np.mean(sums <= target)
    upper = np.mean(sums >= target)
    return float(min(1.0, 2.0 * min(lower, upper)))


def _normal_pvalue(ranks: np.ndarray, n1: int, n2: int, w: float) -> float:
    n = n1 + n2
    mean = n1 * (n + 1) / 2.0
    _, counts = np.unique(ranks, return_counts=True)
    tie = np.sum(counts**3 - counts) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n + 1) - tie)
    if var <= 0.0:
        return 1.0
    z = (abs(w - mean) - 0.5) / math.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(max(z, 0.0))))


def ranksum_test(a, b, alpha: float = 0.05) -> tuple[float, str]:
    """Two-sided rank-sum test; the verdict reads lower values as better.

    Samples of at most 8 per side use the exact null distribution, larger
    ones the normal approximation with tie and continuity corrections.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 3 or len(b) < 3:
        raise ValueError("rank-sum test needs at least 3 samples per side")
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return 1.0, "equivalent"
    ranks = rankdata(pooled)
    w = float(ranks[: len(a)].sum())
    if max(len(a), len(b)) <= EXACT_LIMIT:
        p = _exact_pvalue(ranks, len(a), w)
    else:
        p = _normal_pvalue(ranks, len(a), len(b), w)
    if p >= alpha:
        return p, "equivalent"
    ma, mb = np.median(a), np.median(b)
    if ma == mb:
        # Medians tie; fall back to the rank-sum direction.
        expected = len(a) * (len(pooled) + 1) / 2.0
        return p, "superior" if w < expected else "inferior"
    return p, "superior" if ma < mb else "inferior"


# --------------------------------------------------------------------------
# Tables


@dataclass
class Cell:
    mean: float
    std: float
    symbol: str = ""


@dataclass
class Table:
    methods: list[str]
    instances: list[str]
    reference: str
    cells: dict[tuple[str, str], Cell | None]
    ranks: dict[str, float]
    tallies: dict[str, dict[str, int]]

    def rows(self) -> list[list[str]]:
        out = [["problem", *self.methods]]
        for inst in self.instances:
            row = [inst]
            for m in self.methods:
                c = self.cells[(inst, m)]
                row.append(GAP if c is None else f"{c.mean:.3e}({c.std:.2e}){c.symbol}")
            out.append(row)
        out.append(["+/-/≈"] + [
            "" if m == self.reference else "{}/{}/{}".format(*(self.tallies[m][s] for s in "+-≈"))
            for m in self.methods
        ])
        out.append(["avg rank"] + [f"{self.ranks[m]:.2f}" if not math.isnan(self.ranks[m]) else GAP for m in self.methods])
        return out

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(self.rows())

    def to_text(self) -> str:
        rows = self.rows()
        widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
        return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def summarize(results: list[RunResult], reference: str | None = None, alpha: float = 0.05) -> Table:
    """Mean/std per (instance, method), rank-sum symbols against ``reference``.

    Symbols describe the column method relative to the reference: '+' when
    the reference is significantly better, '-' when worse, '≈' otherwise.
    """
    methods = list(dict.fromkeys(r.method for r in results))
    instances = list(dict.fromkeys(r.instance for r in results))
    if reference is None:
        reference = methods[-1]
    if reference not in methods:
        raise ValueError(f"reference method {reference!r} has no results")
    samples: dict[tuple[str, str], list[float]] = {}
    for r in results:
        samples.setdefault((r.instance, r.method), []).append(r.final_igd)

    cells: dict[tuple[str, str], Cell | None] = {}
    tallies = {m: {"+": 0, "-": 0, "≈": 0} for m in methods}
    rank_lists: dict[str, list[float]] = {m: [] for m in methods}
    for inst in instances:
        present = [m for m in methods if (inst, m) in samples]
        for m in methods:
            vals = samples.get((inst, m))
            cells[(inst, m)] = None if vals is None else Cell(float(np.mean(vals)), float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0)
        ref_vals = samples.get((inst, reference))
        for m in present:
            if m == reference or ref_vals is None:
                continue
            vals = samples[(inst, m)]
            if min(len(vals), len(ref_vals)) < 3:
                continue
            _, verdict = ranksum_test(ref_vals, vals, alpha)
            sym = SYMBOLS[verdict]
            cells[(inst, m)].symbol = sym
            tallies[m][sym] += 1
        row_ranks = rankdata([cells[(inst, m)].mean for m in present])
        for m, rk in zip(present, row_ranks):
            rank_lists[m].append(float(rk))
    ranks = {m: float(np.mean(v)) if v else float("nan") for m, v in rank_lists.items()}
    return Table(methods, instances, reference, cells, ranks, tallies)
