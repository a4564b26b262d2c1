"""Decision loop, strategies, replication and correct-decision-rate curves."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .bandit_env import BanditEnv, best_arm, best_group
from .optics_tree import RoutingTree, leaf_probs, sample_leaf
from .tow_control import ArmStats, Outcome, apply_outcome

DEFAULT_SNAPSHOT_CYCLE = 30


@dataclass(frozen=True)
class Standard:
    name = "standard"


@dataclass(frozen=True)
class Tournament:
    """Adapt one tree level at a time, leaves first, root last.

    ``round_cycles`` holds the lengths of every phase but the last (which
    runs to the end); at depth 2 it is just the first-round length. With
    ``cumulative_stats=False`` the omegas of each phase are estimated only
    from plays made during that phase.
    """

    round_cycles: tuple[int, ...]
    cumulative_stats: bool = True
    name = "tournament"

    def __post_init__(self):
        rc = self.round_cycles
        if isinstance(rc, (int, np.integer)):
            rc = (int(rc),)
        object.__setattr__(self, "round_cycles", tuple(int(c) for c in rc))
        if any(c < 1 for c in self.round_cycles):
            raise ValueError("tournament round lengths must be >= 1")

    @property
    def round1_cycles(self) -> int:
        return self.round_cycles[0]


Strategy = Union[Standard, Tournament]


@dataclass(frozen=True)
class ExperimentConfig:
    reward_probs: tuple[float, ...]
    cycles: int = 30
    replications: int = 1000
    depth: int = 2
    resolution: Union[int, tuple[int, ...]] = 7
    delta: float = 1.0
    alpha: float = 0.999
    omega_cap: float = 100.0
    strategy: Strategy = field(default_factory=Standard)
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "reward_probs", tuple(float(p) for p in self.reward_probs))
        if not isinstance(self.resolution, (int, np.integer)):
            object.__setattr__(self, "resolution", tuple(int(r) for r in self.resolution))
        self.validate()

    def validate(self) -> None:
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValueError(f"depth must be an integer >= 1, got {self.depth!r}")
        if len(self.reward_probs) != 2**self.depth:
            raise ValueError(
                f"reward_probs must have 2**depth = {2**self.depth} entries, "
                f"got {len(self.reward_probs)}"
            )
        if any(not 0.0 <= p <= 1.0 for p in self.reward_probs):
            raise ValueError("reward_probs must lie in [0, 1]")
        resolutions = self.node_resolutions
        if len(resolutions) != 2**self.depth - 1:
            raise ValueError(
                f"resolution must be one value or {2**self.depth - 1} per-node values"
            )
        for r in resolutions:
            if r < 3 or r % 2 == 0:
                raise ValueError(f"resolution must be odd and >= 3, got {r}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta!r}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha!r}")
        if not self.omega_cap > 0:
            raise ValueError(f"omega_cap must be > 0, got {self.omega_cap!r}")
        if self.cycles < 1:
            raise ValueError(f"cycles must be >= 1, got {self.cycles!r}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications!r}")
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be >= 0, got {self.master_seed!r}")
        if isinstance(self.strategy, Tournament):
            if len(self.strategy.round_cycles) != self.depth - 1:
                raise ValueError(
                    f"tournament needs {self.depth - 1} round lengths at depth {self.depth}, "
                    f"got {len(self.strategy.round_cycles)}"
                )
            if sum(self.strategy.round_cycles) >= self.cycles:
                raise ValueError("tournament round1_cycles must be < cycles")
        elif not isinstance(self.strategy, Standard):
            raise ValueError(f"unknown strategy {self.strategy!r}")

    @property
    def node_resolutions(self) -> tuple[int, ...]:
        if isinstance(self.resolution, (int, np.integer)):
            return (int(self.resolution),) * (2**self.depth - 1)
        return tuple(self.resolution)

    @property
    def n_arms(self) -> int:
        return 2**self.depth

    @property
    def n_nodes(self) -> int:
        return 2**self.depth - 1


@dataclass(frozen=True)
class CycleRecord:
    arm: int
    rewarded: bool
    pa_values: tuple[float, ...]
    pa_steps: tuple[int, ...]
    leaf_probs: tuple[float, ...]


@dataclass
class TrialTrace:
    """Per-cycle record of one trial.

    ``leaf_probs`` is the distribution the photon was sampled from;
    ``pa_values``/``pa_steps`` are the adjuster states after that cycle's
    update.
    """

    trial_index: int
    arms: np.ndarray  # (cycles,) int
    rewarded: np.ndarray  # (cycles,) bool
    pa_values: np.ndarray  # (cycles, n_nodes)
    pa_steps: np.ndarray  # (cycles, n_nodes) int
    leaf_probs: np.ndarray  # (cycles, n_arms)

    def __len__(self) -> int:
        return len(self.arms)


@dataclass
class CdrCurves:
    fine_cdr: np.ndarray  # (cycles,)
    coarse_cdr: np.ndarray  # (cycles, depth - 1); column j is level j + 1
    mean_pa: np.ndarray  # (cycles, n_nodes)
    replications: int
    traces: Optional[list[TrialTrace]] = None

    @property
    def cycles(self) -> int:
        return len(self.fine_cdr)

    def coarse(self, level: int = 1) -> np.ndarray:
        return self.coarse_cdr[:, level - 1]


def trial_seed_sequence(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(trial_index,))


def trial_rngs(master_seed: int, trial_index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (photon, environment) generators for one trial."""
    photon_ss, env_ss = trial_seed_sequence(master_seed, trial_index).spawn(2)
    return np.random.default_rng(photon_ss), np.random.default_rng(env_ss)


def initial_tree(config: ExperimentConfig) -> RoutingTree:
    return RoutingTree.uniform(config.depth, config.node_resolutions, config.delta, config.alpha)


def frozen_nodes(config: ExperimentConfig, cycle: int) -> frozenset[int]:
    """Node ids that may not move during ``cycle`` (1-based)."""
    return _phase_frozen(config.depth, _phase(config, cycle))


def _phase(config: ExperimentConfig, cycle: int) -> Optional[int]:
    if not isinstance(config.strategy, Tournament):
        return None
    bound = 0
    for phase, length in enumerate(config.strategy.round_cycles):
        bound += length
        if cycle <= bound:
            return phase
    return len(config.strategy.round_cycles)


def _phase_frozen(depth: int, phase: Optional[int]) -> frozenset[int]:
    if phase is None:
        return frozenset()
    active_level = depth - 1 - phase
    return frozenset(k for k in range(1, 2**depth) if k.bit_length() - 1 != active_level)


def run_cycle(
    tree: RoutingTree,
    env: BanditEnv,
    stats: ArmStats,
    frozen=frozenset(),
    rng: Optional[np.random.Generator] = None,
    omega_cap: float = 100.0,
    stats_baseline: Optional[ArmStats] = None,
) -> tuple[RoutingTree, ArmStats, CycleRecord]:
    """Detect one photon, play the chosen machine and adapt the tree.

    ``rng`` drives the photon routing and defaults to the environment's
    generator. When ``stats_baseline`` is given, omegas are estimated from
    the plays made since that snapshot.
    """
    if env.n_arms != tree.leaf_count:
        raise ValueError(f"environment has {env.n_arms} arms, tree has {tree.leaf_count} leaves")
    probs = leaf_probs(tree)
    arm = sample_leaf(tree, env.rng if rng is None else rng)
    rewarded = env.pull(arm)
    omega_stats = None
    if stats_baseline is not None:
        omega_stats = stats.record(arm, rewarded) - stats_baseline
    tree, stats = apply_outcome(
        tree, Outcome(arm, rewarded), stats, frozen, omega_cap, omega_stats=omega_stats
    )
    record = CycleRecord(arm, rewarded, tree.values, tree.steps, tuple(probs))
    return tree, stats, record


def run_trial(config: ExperimentConfig, trial_index: int) -> TrialTrace:
    photon_rng, env_rng = trial_rngs(config.master_seed, trial_index)
    env = BanditEnv(config.reward_probs, env_rng)
    tree = initial_tree(config)
    stats = ArmStats.zeros(config.n_arms)
    cumulative = not isinstance(config.strategy, Tournament) or config.strategy.cumulative_stats
    baseline = None

    n, m = config.n_nodes, config.n_arms
    arms = np.empty(config.cycles, dtype=np.int64)
    rewarded = np.empty(config.cycles, dtype=bool)
    pa_values = np.empty((config.cycles, n))
    pa_steps = np.empty((config.cycles, n), dtype=np.int64)
    leaf_probs = np.empty((config.cycles, m))

    phase = -1
    for t in range(config.cycles):
        new_phase = _phase(config, t + 1)
        if new_phase != phase:
            phase = new_phase
            frozen = _phase_frozen(config.depth, phase)
            if not cumulative:
                baseline = stats
        tree, stats, rec = run_cycle(
            tree, env, stats, frozen, photon_rng, config.omega_cap, stats_baseline=baseline
        )
        arms[t] = rec.arm
        rewarded[t] = rec.rewarded
        pa_values[t] = rec.pa_values
        pa_steps[t] = rec.pa_steps
        leaf_probs[t] = rec.leaf_probs
    return TrialTrace(trial_index, arms, rewarded, pa_values, pa_steps, leaf_probs)


def aggregate(
    config: ExperimentConfig, traces: Mapping[int, TrialTrace], keep_traces: bool = False
) -> CdrCurves:
    """Reduce per-trial traces to CDR curves in trial-index order."""
    ordered = [traces[i] for i in sorted(traces)]
    best = np.array(sorted(best_arm(config.reward_probs)))
    arms = np.stack([tr.arms for tr in ordered])  # (reps, cycles)
    fine = np.isin(arms, best).mean(axis=0)
    coarse = np.empty((config.cycles, config.depth - 1))
    for level in range(1, config.depth):
        groups = np.array(sorted(best_group(config.reward_probs, level)))
        chosen = (arms - 1) // (config.n_arms // 2**level) + 1
        coarse[:, level - 1] = np.isin(chosen, groups).mean(axis=0)
    pa = np.zeros((config.cycles, config.n_nodes))
    for tr in ordered:
        pa += tr.pa_values
    pa /= len(ordered)
    return CdrCurves(fine, coarse, pa, len(ordered), ordered if keep_traces else None)


def _run_chunk(args) -> list[TrialTrace]:
    config, indices = args
    return [run_trial(config, i) for i in indices]


def run_experiment(
    config: ExperimentConfig, keep_traces: bool = False, workers: int = 1
) -> CdrCurves:
    indices = list(range(config.replications))
    if workers <= 1:
        traces = {i: run_trial(config, i) for i in indices}
    else:
        chunks = [indices[w::workers] for w in range(workers)]
        traces = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(_run_chunk, [(config, c) for c in chunks]):
                traces.update((tr.trial_index, tr) for tr in chunk)
    return aggregate(config, traces, keep_traces)


@dataclass
class SweepResult:
    curves: dict[int, CdrCurves]
    snapshot_cycle: int

    def snapshot(self) -> list[tuple[int, float, float]]:
        """(resolution, fine_cdr, level-1 coarse_cdr) at the snapshot cycle."""
        rows = []
        t = self.snapshot_cycle - 1
        for res, c in self.curves.items():
            coarse = float(c.coarse_cdr[t, 0]) if c.coarse_cdr.shape[1] else math.nan
            rows.append((res, float(c.fine_cdr[t]), coarse))
        return rows


def sweep_resolutions(
    base_config: ExperimentConfig,
    resolutions: Sequence[int],
    snapshot_cycle: int = DEFAULT_SNAPSHOT_CYCLE,
    workers: int = 1,
) -> SweepResult:
    if not 1 <= snapshot_cycle <= base_config.cycles:
        raise ValueError(f"snapshot cycle {snapshot_cycle} outside [1, {base_config.cycles}]")
    curves = {}
    for res in resolutions:
        cfg = replace(base_config, resolution=int(res))
        curves[int(res)] = run_experiment(cfg, workers=workers)
    return SweepResult(curves, snapshot_cycle)


def first_cycle_reaching(curve: Sequence[float], threshold: float) -> float:
    """1-based first cycle with ``curve >= threshold``; inf if never reached."""
    hits = np.flatnonzero(np.asarray(curve) >= threshold)
    return float(hits[0] + 1) if hits.size else math.inf
