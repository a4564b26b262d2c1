"""Built-in experiment presets and their pass/fail checks."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bandit_env import CASE_1, CASE_2, CASE_3
from .engine import (
    CdrCurves,
    ExperimentConfig,
    SweepResult,
    Tournament,
    first_cycle_reaching,
    run_experiment,
    sweep_resolutions,
)

FIG5_RESOLUTIONS = (5, 7, 9, 11, 51, 101)
SNAPSHOT_RESOLUTIONS = (5, 7, 9, 11)
MONOTONE_TOL = 0.05


@dataclass
class Check:
    name: str
    value: float
    threshold: str
    passed: bool


def _window(curve: np.ndarray, first: int, last: int) -> float:
    """Mean over 1-based inclusive cycle window."""
    return float(np.mean(curve[first - 1 : last]))


def nondecreasing(values, tol: float = MONOTONE_TOL) -> bool:
    return all(b >= a - tol for a, b in zip(values, values[1:]))


def nonincreasing(values, tol: float = MONOTONE_TOL) -> bool:
    return all(b <= a + tol for a, b in zip(values, values[1:]))


def fig3_configs(replications: int = 1000, master_seed: int = 0) -> dict[str, ExperimentConfig]:
    return {
        name: ExperimentConfig(probs, cycles=30, replications=replications, master_seed=master_seed)
        for name, probs in (("case1", CASE_1), ("case2", CASE_2))
    }


def fig4_configs(replications: int = 1000, master_seed: int = 0) -> dict[str, ExperimentConfig]:
    base = ExperimentConfig(CASE_3, cycles=30, replications=replications, master_seed=master_seed)
    return {
        "standard": base,
        "tournament": replace(base, strategy=Tournament(15)),
    }


def fig5_config(replications: int = 1000, master_seed: int = 0) -> ExperimentConfig:
    return ExperimentConfig(CASE_3, cycles=500, replications=replications, master_seed=master_seed)


def fig3_checks(curves: dict[str, CdrCurves]) -> list[Check]:
    c1, c2 = curves["case1"], curves["case2"]
    checks = [
        Check("case1 fine_cdr@30", float(c1.fine_cdr[29]), ">= 0.7", c1.fine_cdr[29] >= 0.7),
    ]
    a, b = _window(c1.coarse(1), 5, 30), _window(c2.coarse(1), 5, 30)
    checks.append(Check("case1-case2 coarse_cdr mean(5..30)", a - b, ">= 0", a >= b))
    a, b = _window(c1.fine_cdr, 5, 30), _window(c2.fine_cdr, 5, 30)
    checks.append(Check("case1-case2 fine_cdr mean(5..30)", a - b, ">= 0", a >= b))
    pa = c1.mean_pa
    for node in (1, 2):
        col = pa[:, node - 1]
        checks.append(Check(f"case1 max mean_pa_{node}", float(col.max()), "< 0", bool(col.max() < 0)))
        steps = np.diff(col)
        checks.append(
            Check(f"case1 max step mean_pa_{node}", float(steps.max()), "< 0", bool(steps.max() < 0))
        )
    for name, c in curves.items():
        col = c.mean_pa[:, 2]
        worst = float(np.abs(col).max())
        checks.append(Check(f"{name} max |mean_pa_3|", worst, "<= 1", worst <= 1.0))
    return checks


def fig4_checks(curves: dict[str, CdrCurves]) -> list[Check]:
    std, tour = curves["standard"], curves["tournament"]
    s = _window(std.fine_cdr, 10, 30)
    checks = [Check("standard fine_cdr mean(10..30)", s, "in [0.3, 0.7]", 0.3 <= s <= 0.7)]
    gap = _window(tour.fine_cdr, 26, 30) - _window(std.fine_cdr, 26, 30)
    checks.append(Check("tournament-standard fine_cdr mean(26..30)", gap, ">= 0.1", gap >= 0.1))
    r1, r2 = _window(tour.coarse(1), 1, 15), _window(tour.coarse(1), 16, 30)
    checks.append(Check("tournament coarse_cdr round2-round1", r2 - r1, "< 0", r2 < r1))
    return checks


def fig5_checks(sweep: SweepResult) -> list[Check]:
    res = sorted(sweep.curves)
    at_end = [float(sweep.curves[r].fine_cdr[-1]) for r in res]
    reach = [first_cycle_reaching(sweep.curves[r].fine_cdr, 0.5) for r in res]
    checks = [
        Check(
            "fine_cdr@end nondecreasing in resolution",
            min(np.diff(at_end)) if len(at_end) > 1 else 0.0,
            f">= -{MONOTONE_TOL}",
            nondecreasing(at_end),
        ),
        Check(
            "cycles to fine_cdr>=0.5 nondecreasing in resolution",
            min(np.diff(reach)) if len(reach) > 1 else 0.0,
            ">= 0",
            nondecreasing(reach, tol=0.0),
        ),
    ]
    if 101 in sweep.curves:
        v = float(sweep.curves[101].fine_cdr[-1])
        checks.append(Check("res101 fine_cdr@end", v, ">= 0.9", v >= 0.9))
    snap = {r: (f, c) for r, f, c in sweep.snapshot() if r in SNAPSHOT_RESOLUTIONS}
    if len(snap) > 1:
        fines = [snap[r][0] for r in sorted(snap)]
        coarses = [snap[r][1] for r in sorted(snap)]
        checks.append(
            Check(f"fine_cdr@{sweep.snapshot_cycle} nondecreasing (5..11)",
                  min(np.diff(fines)), f">= -{MONOTONE_TOL}", nondecreasing(fines))
        )
        checks.append(
            Check(f"coarse_cdr@{sweep.snapshot_cycle} nonincreasing (5..11)",
                  max(np.diff(coarses)), f"<= {MONOTONE_TOL}", nonincreasing(coarses))
        )
    return checks


def reproduce(figure: str, replications: int, master_seed: int = 0):
    """Run one figure preset; returns (configs, results, checks)."""
    if figure == "fig3":
        configs = fig3_configs(replications, master_seed)
        curves = {k: run_experiment(c) for k, c in configs.items()}
        return configs, curves, fig3_checks(curves)
    if figure == "fig4":
        configs = fig4_configs(replications, master_seed)
        curves = {k: run_experiment(c) for k, c in configs.items()}
        return configs, curves, fig4_checks(curves)
    if figure == "fig5":
        config = fig5_config(replications, master_seed)
        sweep = sweep_resolutions(config, FIG5_RESOLUTIONS)
        return {"base": config}, sweep, fig5_checks(sweep)
    raise ValueError(f"unknown figure {figure!r}")


__all__ = [
    "Check",
    "fig3_configs",
    "fig4_configs",
    "fig5_config",
    "fig3_checks",
    "fig4_checks",
    "fig5_checks",
    "reproduce",
]
