#!/usr/bin/env python
"""How often does CASE 3 lock onto the wrong group at high resolution?

Once the root adjuster rounds to -n_max the photon can no longer reach
Group 2, so a trial that saturated early on arm 1 never recovers. This
script counts such trials at the last cycle for each resolution.

    python scripts/lock_in_diagnostic.py [--replications 300] [--cycles 500]
"""
import argparse
from dataclasses import replace

import numpy as np

from photon_tow.bandit_env import CASE_3
from photon_tow.engine import ExperimentConfig, run_experiment

parser = argparse.ArgumentParser()
parser.add_argument("--replications", type=int, default=300)
parser.add_argument("--cycles", type=int, default=500)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--resolutions", default="5,7,9,11,51,101")
args = parser.parse_args()

base = ExperimentConfig(CASE_3, cycles=args.cycles, replications=args.replications,
                        master_seed=args.seed)
print("resolution,fine_cdr_end,locked_group1,locked_arm3")
for res in map(int, args.resolutions.split(",")):
    curves = run_experiment(replace(base, resolution=res), keep_traces=True)
    last = np.array([tr.leaf_probs[-1] for tr in curves.traces])
    locked_g1 = float(np.mean(last[:, 2:].sum(axis=1) == 0.0))
    locked_a3 = float(np.mean(last[:, 2] == 1.0))
    print(f"{res},{curves.fine_cdr[-1]:.4f},{locked_g1:.4f},{locked_a3:.4f}")
