"""Bernoulli slot machines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

CASE_1 = (0.8, 0.2, 0.1, 0.1)
CASE_2 = (0.8, 0.1, 0.2, 0.1)
# best arm (3) sits in the worse group
CASE_3 = (0.7, 0.5, 0.9, 0.1)


@dataclass
class BanditEnv:
    reward_probs: Sequence[float]
    rng: np.random.Generator

    def __post_init__(self):
        self.reward_probs = tuple(float(p) for p in self.reward_probs)
        if len(self.reward_probs) < 2:
            raise ValueError("need at least two arms")
        for p in self.reward_probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"reward probability {p!r} outside [0, 1]")

    @classmethod
    def seeded(cls, reward_probs: Sequence[float], seed=None) -> "BanditEnv":
        return cls(reward_probs, np.random.default_rng(seed))

    @property
    def n_arms(self) -> int:
        return len(self.reward_probs)

    def pull(self, arm: int) -> bool:
        """Play ``arm`` (1-based); one uniform draw per call."""
        if not 1 <= arm <= self.n_arms:
            raise ValueError(f"arm {arm!r} outside [1, {self.n_arms}]")
        return bool(self.rng.random() < self.reward_probs[arm - 1])


def best_arm(env_or_probs) -> frozenset[int]:
    probs = _probs(env_or_probs)
    top = max(probs)
    return frozenset(i for i, p in enumerate(probs, start=1) if p == top)


def best_group(env_or_probs, depth_level: int) -> frozenset[int]:
    """Best subtrees (1-based, left to right) among the 2**depth_level at that level.

    Ties are resolved by exact comparison after rounding the sums to 12
    decimals, so 0.3 + 0.2 and 0.4 + 0.1 count as equal.
    """
    probs = _probs(env_or_probs)
    depth = int(np.log2(len(probs)))
    if 2**depth != len(probs):
        raise ValueError("arm count must be a power of two")
    if not 1 <= depth_level <= depth:
        raise ValueError(f"depth_level must be in [1, {depth}], got {depth_level!r}")
    span = len(probs) // 2**depth_level
    sums = [round(sum(probs[g * span : (g + 1) * span]), 12) for g in range(2**depth_level)]
    top = max(sums)
    return frozenset(g for g, s in enumerate(sums, start=1) if s == top)


def group_of(arm: int, n_arms: int, depth_level: int) -> int:
    """1-based subtree index of ``arm`` at ``depth_level``."""
    span = n_arms // 2**depth_level
    return (arm - 1) // span + 1


def _probs(env_or_probs) -> tuple[float, ...]:
    if isinstance(env_or_probs, BanditEnv):
        return env_or_probs.reward_probs
    return tuple(float(p) for p in env_or_probs)
