"""Command-line front end.

    photon-tow run --config cfg.json --out results/ [--seed N] [--traces]
    photon-tow reproduce fig3|fig4|fig5 --out results/ [--paper-fidelity]
    photon-tow sweep --config cfg.json --resolutions 5,7,9 --out results/ [--snapshot-cycle N]
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .engine import (
    DEFAULT_SNAPSHOT_CYCLE,
    CdrCurves,
    ExperimentConfig,
    Standard,
    SweepResult,
    Tournament,
    run_experiment,
    sweep_resolutions,
)
from .figures import reproduce

log = logging.getLogger("photon_tow")

EXIT_OK, EXIT_IO, EXIT_CONFIG = 0, 1, 2

CONFIG_KEYS = {
    "reward_probs", "depth", "resolution", "delta", "alpha", "omega_cap",
    "cycles", "replications", "strategy", "master_seed",
}
REQUIRED_KEYS = {"reward_probs", "cycles"}
STRATEGY_KEYS = {"name", "round1_cycles", "round_cycles", "cumulative_stats"}
SEED_LIMIT = 2**64


class ConfigError(ValueError):
    pass


def _strategy_from_json(raw: Any):
    if raw is None or raw == "standard":
        return Standard()
    if raw == "tournament":
        raise ConfigError("tournament strategy needs round1_cycles")
    if not isinstance(raw, dict):
        raise ConfigError(f"strategy must be 'standard' or an object, got {raw!r}")
    unknown = set(raw) - STRATEGY_KEYS
    if unknown:
        raise ConfigError(f"unknown strategy keys: {sorted(unknown)}")
    name = raw.get("name", "standard")
    if name == "standard":
        extra = set(raw) - {"name"}
        if extra:
            raise ConfigError(f"standard strategy takes no options, got {sorted(extra)}")
        return Standard()
    if name != "tournament":
        raise ConfigError(f"unknown strategy name {name!r}")
    if "round1_cycles" in raw and "round_cycles" in raw:
        raise ConfigError("give either round1_cycles or round_cycles, not both")
    rounds = raw.get("round_cycles", raw.get("round1_cycles"))
    if rounds is None:
        raise ConfigError("tournament strategy needs round1_cycles")
    cumulative = raw.get("cumulative_stats", True)
    if not isinstance(cumulative, bool):
        raise ConfigError("cumulative_stats must be a boolean")
    return Tournament(rounds if isinstance(rounds, int) else tuple(rounds), cumulative)


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a validated config; raises ConfigError naming the violated rule."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = REQUIRED_KEYS - set(raw)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    kwargs = {k: v for k, v in raw.items() if k != "strategy"}
    for key in ("cycles", "replications", "depth", "master_seed"):
        if key in kwargs and (isinstance(kwargs[key], bool) or not isinstance(kwargs[key], int)):
            raise ConfigError(f"{key} must be an integer")
    res = kwargs.get("resolution")
    if isinstance(res, list):
        kwargs["resolution"] = tuple(res)
    try:
        return ExperimentConfig(strategy=_strategy_from_json(raw.get("strategy")), **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    if isinstance(config.strategy, Tournament):
        strategy: Any = {
            "name": "tournament",
            "round_cycles": list(config.strategy.round_cycles),
            "cumulative_stats": config.strategy.cumulative_stats,
        }
    else:
        strategy = "standard"
    res = config.resolution
    return {
        "reward_probs": list(config.reward_probs),
        "depth": config.depth,
        "resolution": res if isinstance(res, int) else list(res),
        "delta": config.delta,
        "alpha": config.alpha,
        "omega_cap": config.omega_cap,
        "cycles": config.cycles,
        "replications": config.replications,
        "strategy": strategy,
        "master_seed": config.master_seed,
    }


def load_config(path: Path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def _rate(x: float) -> str:
    return format(float(x), ".6g")


def curves_header(config: ExperimentConfig) -> list[str]:
    return (
        ["cycle", "fine_cdr"]
        + [f"coarse_cdr_L{lvl}" for lvl in range(1, config.depth)]
        + [f"mean_pa_{k}" for k in range(1, config.n_nodes + 1)]
    )


def write_curves(path: Path, config: ExperimentConfig, curves: CdrCurves) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(curves_header(config))
        for t in range(curves.cycles):
            w.writerow(
                [t + 1, _rate(curves.fine_cdr[t])]
                + [_rate(x) for x in curves.coarse_cdr[t]]
                + [repr(float(x)) for x in curves.mean_pa[t]]
            )


def write_traces(path: Path, config: ExperimentConfig, curves: CdrCurves) -> None:
    n, m = config.n_nodes, config.n_arms
    header = (
        ["trial", "cycle", "arm", "rewarded"]
        + [f"pa_{k}" for k in range(1, n + 1)]
        + [f"step_{k}" for k in range(1, n + 1)]
        + [f"p_arm_{j}" for j in range(1, m + 1)]
    )
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for tr in curves.traces or ():
            for t in range(len(tr)):
                w.writerow(
                    [tr.trial_index, t + 1, int(tr.arms[t]), int(tr.rewarded[t])]
                    + [repr(float(x)) for x in tr.pa_values[t]]
                    + [int(x) for x in tr.pa_steps[t]]
                    + [repr(float(x)) for x in tr.leaf_probs[t]]
                )


def write_snapshot(path: Path, sweep: SweepResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["resolution", "fine_cdr", "coarse_cdr"])
        for res, fine, coarse in sweep.snapshot():
            w.writerow([res, _rate(fine), _rate(coarse)])


def seed_derivation(config: ExperimentConfig) -> dict:
    return {
        "scheme": "numpy.random.SeedSequence(master_seed, spawn_key=(trial,)).spawn(2)",
        "generator": "numpy.random.PCG64",
        "streams": {"photon": 0, "environment": 1},
        "trials": [
            {"trial": i, "entropy": config.master_seed, "spawn_key": [i]}
            for i in range(config.replications)
        ],
    }


def dump_manifest(manifest: dict) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"


def build_manifest(
    command: str, configs: dict[str, ExperimentConfig], outputs: Sequence[str], started: float,
    extra: Optional[dict] = None,
) -> dict:
    first = next(iter(configs.values()))
    manifest = {
        "command": command,
        "tool": "photon_tow",
        "version": __version__,
        "master_seed": first.master_seed,
        "configs": {name: config_to_dict(c) for name, c in configs.items()},
        "seed_derivation": seed_derivation(first),
        "wall_clock_seconds": round(time.perf_counter() - started, 6),
        "outputs": sorted(outputs),
    }
    if extra:
        manifest.update(extra)
    return manifest


def _write_manifest(out: Path, manifest: dict) -> None:
    (out / "manifest.json").write_text(dump_manifest(manifest))


def parse_resolutions(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"resolutions must be comma-separated integers: {text!r}") from exc
    if not values:
        raise ConfigError("resolutions list is empty")
    for v in values:
        if v < 3 or v % 2 == 0:
            raise ConfigError(f"resolution must be odd and >= 3, got {v}")
    return values


def cmd_run(args) -> int:
    started = time.perf_counter()
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    curves = run_experiment(config, keep_traces=args.traces, workers=args.workers)
    outputs = ["curves.csv", "manifest.json"]
    write_curves(out / "curves.csv", config, curves)
    if args.traces:
        write_traces(out / "traces.csv", config, curves)
        outputs.append("traces.csv")
    _write_manifest(out, build_manifest("run", {"run": config}, outputs, started))
    log.info("wrote %s", ", ".join(outputs))
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    resolutions = parse_resolutions(args.resolutions)
    config = load_config(args.config)
    if not 1 <= args.snapshot_cycle <= config.cycles:
        raise ConfigError(f"snapshot cycle must be in [1, {config.cycles}]")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sweep = sweep_resolutions(config, resolutions, args.snapshot_cycle, workers=args.workers)
    outputs = ["snapshot.csv", "manifest.json"]
    configs = {}
    for res, curves in sweep.curves.items():
        cfg = replace(config, resolution=res)
        configs[f"res{res}"] = cfg
        name = f"curves_res{res}.csv"
        write_curves(out / name, cfg, curves)
        outputs.append(name)
    write_snapshot(out / "snapshot.csv", sweep)
    manifest = build_manifest(
        "sweep", configs, outputs, started, {"snapshot_cycle": args.snapshot_cycle}
    )
    _write_manifest(out, manifest)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    started = time.perf_counter()
    if args.paper_fidelity:
        reps = 100 if args.figure == "fig5" else 10
    else:
        reps = args.replications or 1000
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    configs, results, checks = reproduce(args.figure, reps, args.seed)
    outputs = ["summary.csv", "manifest.json"]
    if isinstance(results, SweepResult):
        base = configs["base"]
        configs = {}
        for res, curves in results.curves.items():
            cfg = replace(base, resolution=res)
            configs[f"res{res}"] = cfg
            name = f"curves_res{res}.csv"
            write_curves(out / name, cfg, curves)
            outputs.append(name)
        write_snapshot(out / "snapshot.csv", results)
        outputs.append("snapshot.csv")
    else:
        for name, curves in results.items():
            write_curves(out / f"curves_{name}.csv", configs[name], curves)
            outputs.append(f"curves_{name}.csv")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "value", "threshold", "status"])
        for c in checks:
            w.writerow([c.name, _rate(c.value), c.threshold, "PASS" if c.passed else "FAIL"])
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {args.figure}: {c.name} = {_rate(c.value)} ({c.threshold})")
    _write_manifest(
        out, build_manifest(f"reproduce {args.figure}", configs, outputs, started,
                            {"paper_fidelity": bool(args.paper_fidelity)})
    )
    return EXIT_OK


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < SEED_LIMIT:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="photon-tow", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--seed", type=_seed, default=None, help="override master_seed")
    run.add_argument("--traces", action="store_true", help="also write traces.csv")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("reproduce", help="run a built-in figure preset")
    rep.add_argument("figure", choices=["fig3", "fig4", "fig5"])
    rep.add_argument("--out", required=True, type=Path)
    rep.add_argument("--paper-fidelity", action="store_true",
                     help="use the original trial counts (10, or 100 for fig5)")
    rep.add_argument("--replications", type=int, default=None)
    rep.add_argument("--seed", type=_seed, default=0)
    rep.set_defaults(func=cmd_reproduce)

    sw = sub.add_parser("sweep", help="rerun a config over several resolutions")
    sw.add_argument("--config", required=True, type=Path)
    sw.add_argument("--resolutions", required=True)
    sw.add_argument("--out", required=True, type=Path)
    sw.add_argument("--snapshot-cycle", type=int, default=DEFAULT_SNAPSHOT_CYCLE)
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
