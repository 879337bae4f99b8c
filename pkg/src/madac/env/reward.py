"""Progress-based team reward and the alternative reward baselines."""

from __future__ import annotations

from dataclasses import dataclass

R3_CAP = 1e6


@dataclass(frozen=True)
class RewardState:
    f0: float
    f_best: float
    p: float = 0.0

    @classmethod
    def start(cls, f0: float) -> RewardState:
        return cls(f0=float(f0), f_best=float(f0), p=0.0)


def compute_reward(igd_new: float, rs: RewardState) -> tuple[float, RewardState]:
    """Reward an improvement over the best metric value seen so far.

    Progress is ``p = (f0 - f_best) / f0``; the reward is the increase of
    ``p**2 / 2``, so later improvements of equal size earn more and the
    undiscounted return of an episode is ``p_T**2 / 2``.
    """
    if igd_new < 0:
        raise ValueError("metric values must be non-negative")
    if rs.f0 <= 0.0:
        return 0.0, rs
    if igd_new < rs.f_best:
        p_new = (rs.f0 - igd_new) / rs.f0
        return 0.5 * (p_new * p_new - rs.p * rs.p), RewardState(rs.f0, float(igd_new), p_new)
    return 0.0, rs


def alt_reward(mode: str, f_prev: float, f_new: float, f_best: float, f_opt: float = 0.0) -> float:
    """Reward variants ``R1`` (raw gain), ``R2`` (10/1/0 levels) and ``R3`` (relative gain)."""
    mode = mode.upper()
    if mode == "R1":
        return max(f_prev - f_new, 0.0)
    if mode == "R2":
        if f_new < f_best:
            return 10.0
        if f_new < f_prev:
            return 1.0
        return 0.0
    if mode == "R3":
        gap = f_new - f_opt
        if gap <= 0.0:
            return R3_CAP if f_prev > f_new else 0.0
        return max((f_prev - f_new) / gap, 0.0)
    raise ValueError(f"unknown reward mode {mode!r}")
