"""Hierarchical single-photon tug-of-war bandit simulator."""

from .bandit_env import CASE_1, CASE_2, CASE_3, BanditEnv, best_arm, best_group
from .engine import (
    CdrCurves,
    ExperimentConfig,
    Standard,
    Tournament,
    TrialTrace,
    run_cycle,
    run_experiment,
    run_trial,
    sweep_resolutions,
)
from .optics_tree import (
    PaState,
    RoutingTree,
    branch_prob_left,
    leaf_distribution,
    pos_angle,
    round_clamp,
    sample_leaf,
)
from .tow_control import (
    ArmStats,
    Outcome,
    apply_outcome,
    compute_omega,
    estimate_subtree_prob,
    refresh_all_omegas,
    update_pa,
)

__version__ = "0.1.0"
