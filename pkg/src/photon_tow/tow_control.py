"""Tug-of-war dynamics of the polarization adjusters.

Each internal node is pulled by its two subtrees: a win on the left pulls
the PA value down by ``delta``, a loss on the left pushes it up by ``omega``
(and mirrored for the right). ``omega`` couples the two sides through the
estimated reward probabilities of the subtrees.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Collection, Iterable, Optional

from .optics_tree import PaState, RoutingTree, path_to_leaf, subtree_arms

DEFAULT_OMEGA_CAP = 100.0


@dataclass(frozen=True)
class ArmStats:
    """Play and win counts per arm (index 0 is arm 1)."""

    plays: tuple[int, ...]
    wins: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "plays", tuple(int(n) for n in self.plays))
        object.__setattr__(self, "wins", tuple(int(n) for n in self.wins))
        if len(self.plays) != len(self.wins):
            raise ValueError("plays and wins must have the same length")
        for n, w in zip(self.plays, self.wins):
            if n < 0 or w < 0 or w > n:
                raise ValueError(f"invalid counts: wins={w}, plays={n}")

    @classmethod
    def zeros(cls, n_arms: int) -> "ArmStats":
        return cls((0,) * n_arms, (0,) * n_arms)

    @property
    def n_arms(self) -> int:
        return len(self.plays)

    def record(self, arm: int, rewarded: bool) -> "ArmStats":
        plays = list(self.plays)
        wins = list(self.wins)
        plays[arm - 1] += 1
        if rewarded:
            wins[arm - 1] += 1
        return ArmStats(tuple(plays), tuple(wins))

    def __sub__(self, other: "ArmStats") -> "ArmStats":
        return ArmStats(
            tuple(a - b for a, b in zip(self.plays, other.plays)),
            tuple(a - b for a, b in zip(self.wins, other.wins)),
        )


@dataclass(frozen=True)
class Outcome:
    arm: int
    rewarded: bool


def update_pa(pa: PaState, node_side: str, rewarded: bool) -> PaState:
    """One tug-of-war step for a node whose ``node_side`` subtree was played."""
    if node_side == "left":
        pull = -pa.delta if rewarded else pa.omega
    elif node_side == "right":
        pull = pa.delta if rewarded else -pa.omega
    else:
        raise ValueError(f"node_side must be 'left' or 'right', got {node_side!r}")
    return replace(pa, value=pull + pa.alpha * pa.value)


def estimate_subtree_prob(stats: ArmStats, arms: Iterable[int]) -> Optional[float]:
    """Pooled win rate over ``arms``; None when none of them has been played."""
    arms = list(arms)
    if not arms:
        raise ValueError("arms must be nonempty")
    plays = sum(stats.plays[a - 1] for a in arms)
    if plays == 0:
        return None
    return sum(stats.wins[a - 1] for a in arms) / plays


def compute_omega(
    p_left_hat: Optional[float],
    p_right_hat: Optional[float],
    omega_cap: float = DEFAULT_OMEGA_CAP,
) -> float:
    if not omega_cap > 0:
        raise ValueError(f"omega_cap must be > 0, got {omega_cap!r}")
    if p_left_hat is None or p_right_hat is None:
        return 1.0
    total = p_left_hat + p_right_hat
    denom = 2.0 - total
    if denom <= 0:
        return float(omega_cap)
    return min(total / denom, float(omega_cap))


def refresh_all_omegas(
    tree: RoutingTree, stats: ArmStats, omega_cap: float = DEFAULT_OMEGA_CAP
) -> RoutingTree:
    if stats.n_arms != tree.leaf_count:
        raise ValueError(f"stats cover {stats.n_arms} arms, tree has {tree.leaf_count}")
    nodes = []
    for k, pa in enumerate(tree.nodes, start=1):
        p_left = estimate_subtree_prob(stats, subtree_arms(tree.depth, 2 * k))
        p_right = estimate_subtree_prob(stats, subtree_arms(tree.depth, 2 * k + 1))
        omega = compute_omega(p_left, p_right, omega_cap)
        nodes.append(pa if pa.omega == omega else replace(pa, omega=omega))
    return RoutingTree(tree.depth, tuple(nodes))


def apply_outcome(
    tree: RoutingTree,
    outcome: Outcome,
    stats: ArmStats,
    frozen: Collection[int] = frozenset(),
    omega_cap: float = DEFAULT_OMEGA_CAP,
    omega_stats: Optional[ArmStats] = None,
) -> tuple[RoutingTree, ArmStats]:
    """Update counts, pull the PA values on the played path, refresh omegas.

    Nodes listed in ``frozen`` and nodes off the path keep their values. The
    omegas used for the pull are the ones set by the previous refresh.
    ``omega_stats`` (already including this outcome) overrides the counts used
    for the refresh; by default the updated ``stats`` are used.
    """
    stats = stats.record(outcome.arm, outcome.rewarded)
    nodes = list(tree.nodes)
    for node_id, side in path_to_leaf(tree.depth, outcome.arm):
        if node_id in frozen:
            continue
        nodes[node_id - 1] = update_pa(nodes[node_id - 1], side, outcome.rewarded)
    tree = RoutingTree(tree.depth, tuple(nodes))
    tree = refresh_all_omegas(tree, stats if omega_stats is None else omega_stats, omega_cap)
    return tree, stats
