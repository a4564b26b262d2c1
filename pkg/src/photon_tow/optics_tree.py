"""Polarization-routing tree.

A photon polarized at 45 degrees enters the root. At every internal node a
half-wave plate, set from the rounded polarization-adjuster (PA) value,
rotates the polarization before a polarizing beam splitter sends the photon
left or right. The branch probability follows Malus' law.

Nodes are numbered in heap order: node 1 is the root and the children of
node ``k`` are ``2k`` (left) and ``2k + 1`` (right). Arms are numbered
1..2**depth from left to right. Negative PA values favour the left branch.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

__all__ = [
    "PaState",
    "RoutingTree",
    "round_clamp",
    "pos_angle",
    "branch_prob_left",
    "leaf_distribution",
    "sample_leaf",
    "leaf_probs",
    "path_to_leaf",
    "subtree_arms",
]


def _check_resolution(resolution: int) -> None:
    if int(resolution) != resolution or resolution < 3 or resolution % 2 == 0:
        raise ValueError(f"resolution must be odd and >= 3, got {resolution!r}")


@dataclass(frozen=True)
class PaState:
    """One polarization adjuster.

    ``value`` is unconstrained; clamping only happens when it is rounded to
    a half-wave-plate step.
    """

    value: float = 0.0
    delta: float = 1.0
    alpha: float = 0.999
    omega: float = 1.0
    resolution: int = 7

    def __post_init__(self):
        _check_resolution(self.resolution)
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta!r}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha!r}")
        if not self.omega >= 0:
            raise ValueError(f"omega must be >= 0, got {self.omega!r}")

    @property
    def n_max(self) -> int:
        return (self.resolution - 1) // 2

    @property
    def step(self) -> int:
        return round_clamp(self.value, self.resolution)


@dataclass(frozen=True)
class RoutingTree:
    depth: int
    nodes: tuple[PaState, ...] = field(default=())

    def __post_init__(self):
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValueError(f"depth must be an integer >= 1, got {self.depth!r}")
        n_nodes = 2**self.depth - 1
        if not self.nodes:
            object.__setattr__(self, "nodes", tuple(PaState() for _ in range(n_nodes)))
        else:
            object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(self.nodes) != n_nodes:
            raise ValueError(
                f"depth {self.depth} tree needs {n_nodes} nodes, got {len(self.nodes)}"
            )

    @classmethod
    def uniform(
        cls,
        depth: int = 2,
        resolution: int | Sequence[int] = 7,
        delta: float = 1.0,
        alpha: float = 0.999,
    ) -> "RoutingTree":
        """All-zero tree; ``resolution`` is one value or one per node."""
        n_nodes = 2**depth - 1
        if isinstance(resolution, (int, np.integer)):
            resolution = [int(resolution)] * n_nodes
        if len(resolution) != n_nodes:
            raise ValueError(f"expected {n_nodes} per-node resolutions, got {len(resolution)}")
        nodes = tuple(PaState(delta=delta, alpha=alpha, resolution=int(r)) for r in resolution)
        return cls(depth, nodes)

    @classmethod
    def from_values(
        cls, depth: int, values: Sequence[float], resolution: int | Sequence[int] = 7
    ) -> "RoutingTree":
        tree = cls.uniform(depth, resolution)
        return tree.with_values(values)

    @property
    def leaf_count(self) -> int:
        return 2**self.depth

    def node(self, node_id: int) -> PaState:
        return self.nodes[node_id - 1]

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(pa.value for pa in self.nodes)

    @property
    def steps(self) -> tuple[int, ...]:
        return tuple(pa.step for pa in self.nodes)

    def with_values(self, values: Sequence[float]) -> "RoutingTree":
        if len(values) != len(self.nodes):
            raise ValueError(f"expected {len(self.nodes)} values, got {len(values)}")
        return RoutingTree(
            self.depth, tuple(replace(pa, value=float(v)) for pa, v in zip(self.nodes, values))
        )

    def replace_node(self, node_id: int, pa: PaState) -> "RoutingTree":
        nodes = list(self.nodes)
        nodes[node_id - 1] = pa
        return RoutingTree(self.depth, tuple(nodes))

    def level_nodes(self, level: int) -> range:
        """Node ids at ``level`` (root is level 0)."""
        return range(2**level, 2 ** (level + 1))


def round_clamp(value: float, resolution: int) -> int:
    """Round to nearest (halves away from zero) and clamp into [-n_max, n_max]."""
    n_max = (resolution - 1) // 2
    n = math.floor(abs(value) + 0.5)
    n = min(n, n_max)
    return -n if value < 0 else n


def pos_angle(n: int, resolution: int) -> float:
    """Half-wave-plate angle in degrees for rounded step ``n``."""
    _check_step(n, resolution)
    return 45.0 * -n / (resolution - 1)


@lru_cache(maxsize=4096)
def branch_prob_left(n: int, resolution: int) -> float:
    """Probability that the photon leaves the node on the left branch.

    The plate at ``pos_angle(n)`` turns the 45-degree input polarization by
    twice that angle, so the left-port fraction is cos^2(45 + 90 n / (N - 1)).
    """
    _check_step(n, resolution)
    if n == 0:
        return 0.5
    n_max = (resolution - 1) // 2
    if n == -n_max:
        return 1.0
    if n == n_max:
        return 0.0
    theta = math.radians(45.0 - 2.0 * pos_angle(n, resolution))
    return math.cos(theta) ** 2


def _check_step(n: int, resolution: int) -> None:
    _check_resolution(resolution)
    n_max = (resolution - 1) // 2
    if int(n) != n or abs(n) > n_max:
        raise ValueError(f"step {n!r} outside [-{n_max}, {n_max}] for resolution {resolution}")


def leaf_probs(tree: RoutingTree) -> list[float]:
    """Plain-list form of :func:`leaf_distribution`."""
    left = [branch_prob_left(pa.step, pa.resolution) for pa in tree.nodes]
    # heap order: the nodes of one level are contiguous and left to right
    probs = [1.0]
    for level in range(tree.depth):
        first = 2**level
        nxt = []
        for i, p in enumerate(probs):
            q = left[first + i - 1]
            nxt.append(p * q)
            nxt.append(p * (1.0 - q))
        probs = nxt
    return probs


def leaf_distribution(tree: RoutingTree) -> np.ndarray:
    """Arm selection probabilities, arm 1 first."""
    return np.array(leaf_probs(tree))


def sample_leaf(tree: RoutingTree, rng: np.random.Generator) -> int:
    """Route one photon down the tree and return the arm that detects it.

    Draws exactly one uniform variate per level.
    """
    u = rng.random(tree.depth)
    k = 1
    for level in range(tree.depth):
        pa = tree.nodes[k - 1]
        p_left = branch_prob_left(pa.step, pa.resolution)
        k = 2 * k if u[level] < p_left else 2 * k + 1
    return k - tree.leaf_count + 1


def path_to_leaf(depth: int, arm: int) -> tuple[tuple[int, str], ...]:
    """(node_id, side) pairs from the root down to ``arm``."""
    if not 1 <= arm <= 2**depth:
        raise ValueError(f"arm {arm!r} outside [1, {2**depth}]")
    return _path(depth, arm)


@lru_cache(maxsize=None)
def _path(depth: int, arm: int) -> tuple[tuple[int, str], ...]:
    leaf = 2**depth + arm - 1
    path = []
    k = leaf
    while k > 1:
        parent = k // 2
        path.append((parent, "left" if k % 2 == 0 else "right"))
        k = parent
    return tuple(path[::-1])


@lru_cache(maxsize=None)
def subtree_arms(depth: int, node_id: int) -> range:
    """Arms (1-based) below ``node_id``; a leaf heap id maps to its own arm."""
    level = node_id.bit_length() - 1
    span = 2 ** (depth - level)
    first = (node_id - 2**level) * span + 1
    return range(first, first + span)
