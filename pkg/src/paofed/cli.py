"""Command-line entry point: run experiment suites, check the step-size bound,
and reproduce the standard figure bundles.

Subcommands:
  run      execute labeled variants and write one learning-curve CSV each
  bound    print the empirical step-size stability bound for a config
  figures  expand a named figure recipe (fig1_coordination, fig2_m_and_alpha,
           fig3_setting2) into its CSV bundle

Configs are JSON; "preset" picks the setting1/setting2 parameter sets and the
"experiment"/"algo" objects override individual fields. Outputs are one CSV
per curve plus a manifest.json recording the fully resolved configuration, so
a bundle can be reproduced byte-for-byte from its manifest.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .algorithms import AlgoConfig, DelayWeightSchedule
from .data_stream import DataGenConfig
from .engine import ExperimentConfig, Simulation, SuiteResult, run_suite
from .metrics import MSE_DB_FLOOR, estimate_mu_bound

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "RunPlan",
    "FigureRecipe",
    "FIGURE_RECIPES",
    "SETTING_PRESETS",
    "VARIANT_PRESETS",
    "load_config",
    "cmd_run",
    "cmd_bound",
    "cmd_figures",
    "main",
]

CSV_COLUMNS = ("iteration", "mse_db_mean", "mse_db_std", "uploads", "downloads")

SETTING_PRESETS: dict[str, dict] = {
    "setting1": {
        "availability_group_probs": (0.25, 0.1, 0.025, 0.005),
        "delay_base": 0.2,
        "delay_granularity": 1,
        "l_max": 10,
    },
    "setting2": {
        "availability_group_probs": (0.025, 0.01, 0.0025, 0.0005),
        "delay_base": 0.4,
        "delay_granularity": 10,
        "l_max": 60,
    },
}

# Labeled algorithm configurations; keys are the labels used in output files.
# "alpha_decay" expands at plan time to a geometric delay-weight schedule
# over the channel's l_max, decaying once per delay-grid step.
VARIANT_PRESETS: dict[str, dict] = {
    "Online-Fed": {"variant": "online_fed", "subsample_size": 2},
    "Online-FedSGD": {"variant": "online_fedsgd"},
    "PSO-Fed": {"variant": "pso_fed", "coordinated": True, "reuse_local": True},
    "PAO-Fed-C0": {"variant": "pao_fed", "coordinated": True, "reuse_local": False},
    "PAO-Fed-C1": {"variant": "pao_fed", "coordinated": True, "reuse_local": True},
    "PAO-Fed-C2": {
        "variant": "pao_fed",
        "coordinated": True,
        "reuse_local": True,
        "alpha_decay": 0.2,
    },
    "PAO-Fed-U0": {"variant": "pao_fed", "coordinated": False, "reuse_local": False},
    "PAO-Fed-U1": {"variant": "pao_fed", "coordinated": False, "reuse_local": True},
    "PAO-Fed-U1-m32": {
        "variant": "pao_fed",
        "coordinated": False,
        "reuse_local": True,
        "m": 32,
    },
}


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


@dataclass(frozen=True)
class FigureRecipe:
    name: str
    title: str
    setting: str
    variants: tuple[str, ...]

    def __post_init__(self):
        if not self.variants:
            raise ValueError("recipe needs at least one variant")


FIGURE_RECIPES: dict[str, FigureRecipe] = {
    r.name: r
    for r in (
        FigureRecipe(
            name="fig1_coordination",
            title="Partial-sharing variants, Setting I",
            setting="setting1",
            variants=(
                "PSO-Fed",
                "PAO-Fed-C0",
                "PAO-Fed-C1",
                "PAO-Fed-U0",
                "PAO-Fed-U1",
            ),
        ),
        FigureRecipe(
            name="fig2_m_and_alpha",
            title="Fragment size and delay weights, Setting I",
            setting="setting1",
            variants=(
                "Online-Fed",
                "Online-FedSGD",
                "PAO-Fed-U1",
                "PAO-Fed-U1-m32",
                "PAO-Fed-C1",
                "PAO-Fed-C2",
            ),
        ),
        FigureRecipe(
            name="fig3_setting2",
            title="Harsher asynchrony, Setting II",
            setting="setting2",
            variants=(
                "Online-FedSGD",
                "PAO-Fed-U1",
                "PAO-Fed-C1",
                "PAO-Fed-C2",
            ),
        ),
    )
}

_ALGO_FIELDS = {f.name for f in dataclasses.fields(AlgoConfig)}
_DATA_FIELDS = {f.name for f in dataclasses.fields(DataGenConfig)}
_EXPERIMENT_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _reject_unknown(d: dict, allowed: set, path: str) -> None:
    for key in d:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown field")


def _algo_from_dict(raw: dict, l_max: int, granularity: int, path: str) -> AlgoConfig:
    d = dict(raw)
    _reject_unknown(d, _ALGO_FIELDS | {"alpha_decay"}, path)
    decay = d.pop("alpha_decay", None)
    weights = d.pop("alpha_schedule", None)
    schedule = None
    try:
        if decay is not None and weights is not None:
            raise ValueError("alpha_decay and alpha_schedule are mutually exclusive")
        if decay is not None:
            schedule = DelayWeightSchedule.geometric(float(decay), l_max, granularity)
        elif weights is not None:
            schedule = DelayWeightSchedule(
                weights=tuple(float(x) for x in weights), l_max=len(weights) - 1
            )
        for k in ("mu", "m", "subsample_size"):
            if k in d and d[k] is not None:
                d[k] = int(d[k]) if k != "mu" else float(d[k])
        return AlgoConfig(alpha_schedule=schedule, **d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e


def _experiment_from_dict(raw: dict, algo: AlgoConfig, path: str) -> ExperimentConfig:
    d = dict(raw)
    _reject_unknown(d, _EXPERIMENT_FIELDS, path)
    try:
        if "data" in d:
            data_raw = dict(d["data"])
            _reject_unknown(data_raw, _DATA_FIELDS, f"{path}.data")
            d["data"] = DataGenConfig(**data_raw)
        for k in ("group_sizes", "availability_group_probs", "seeds"):
            if k in d and d[k] is not None:
                d[k] = tuple(d[k])
        return ExperimentConfig(algo=algo, **d)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e


@dataclass(frozen=True)
class RunPlan:
    """Fully resolved work order: labeled configs sharing one environment."""

    base: ExperimentConfig
    configs: dict[str, ExperimentConfig]
    seeds: tuple[int, ...]


def _parse_seeds(spec) -> Optional[tuple[int, ...]]:
    """Accept an int count n (meaning 0..n-1), a list, or '0,3,7' text."""
    if spec is None:
        return None
    if isinstance(spec, int):
        return tuple(range(spec))
    if isinstance(spec, str):
        parts = [p for p in spec.split(",") if p.strip() != ""]
        try:
            values = [int(p) for p in parts]
        except ValueError as e:
            raise ConfigError(f"seeds: {e}") from e
        return tuple(range(values[0])) if len(values) == 1 else tuple(values)
    return tuple(int(s) for s in spec)


def load_config(
    path=None,
    preset: Optional[str] = None,
    variants: Optional[Sequence[str]] = None,
    seeds=None,
) -> RunPlan:
    """Resolve a JSON config file and/or preset into a RunPlan.

    Precedence, lowest to highest: built-in defaults, named preset, the
    file's "experiment"/"algo" objects, then explicit arguments (variant
    list, seed list).
    """
    doc: dict = {}
    if path is not None:
        p = Path(path)
        try:
            doc = json.loads(p.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {p}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"{p}: not valid JSON ({e})") from e
        if not isinstance(doc, dict):
            raise ConfigError(f"{p}: top level must be an object")
    _reject_unknown(
        doc, {"preset", "experiment", "algo", "variants", "seeds"}, "config"
    )

    preset = doc.get("preset", preset)
    exp_raw: dict = {}
    if preset is not None:
        if preset not in SETTING_PRESETS:
            raise ConfigError(
                f"preset: unknown preset {preset!r}; "
                f"choose from {sorted(SETTING_PRESETS)}"
            )
        exp_raw.update(SETTING_PRESETS[preset])
    exp_raw.update(doc.get("experiment", {}))

    l_max = int(exp_raw.get("l_max", ExperimentConfig.l_max))
    granularity = int(
        exp_raw.get("delay_granularity", ExperimentConfig.delay_granularity)
    )
    base_algo = _algo_from_dict(doc.get("algo", {}), l_max, granularity, "algo")
    base = _experiment_from_dict(exp_raw, base_algo, "experiment")

    seed_list = _parse_seeds(seeds)
    if seed_list is None:
        seed_list = _parse_seeds(doc.get("seeds"))
    if seed_list is None:
        seed_list = base.seeds
    if not seed_list:
        raise ConfigError("seeds: need at least one seed")
    base = dataclasses.replace(base, seeds=seed_list)

    labels = list(variants) if variants is not None else doc.get("variants")
    if labels is None:
        labels = ["PAO-Fed-U1"]
    configs: dict[str, ExperimentConfig] = {}
    for label in labels:
        if label not in VARIANT_PRESETS:
            raise ConfigError(
                f"variants: unknown variant {label!r}; "
                f"choose from {sorted(VARIANT_PRESETS)}"
            )
        merged = dict(doc.get("algo", {}))
        merged.update(VARIANT_PRESETS[label])
        algo = _algo_from_dict(
            merged, base.l_max, base.delay_granularity, f"variants.{label}"
        )
        try:
            configs[label] = dataclasses.replace(base, algo=algo)
        except ValueError as e:
            raise ConfigError(f"variants.{label}: {e}") from e
    return RunPlan(base=base, configs=configs, seeds=seed_list)


# -- output -----------------------------------------------------------------


def _csv_value(x: float) -> str:
    if x == float("-inf"):
        x = MSE_DB_FLOOR
    if x == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(float(x))


def write_curve_csv(path: Path, suite: SuiteResult) -> None:
    with open(path, "w", newline="") as f:
        out = csv.writer(f)
        out.writerow(CSV_COLUMNS)
        for i, n in enumerate(suite.eval_iterations):
            out.writerow(
                [
                    int(n),
                    _csv_value(float(suite.mean_mse_db[i])),
                    _csv_value(float(suite.std_mse_db[i])),
                    _csv_value(float(suite.mean_uploads[i])),
                    _csv_value(float(suite.mean_downloads[i])),
                ]
            )


def _config_json(cfg: ExperimentConfig) -> dict:
    d = dataclasses.asdict(cfg)
    if cfg.algo.alpha_schedule is not None:
        d["algo"]["alpha_schedule"] = {
            "weights": list(cfg.algo.alpha_schedule.weights),
            "l_max": cfg.algo.alpha_schedule.l_max,
        }
    return d


def write_bundle(
    out_dir: Path,
    plan: RunPlan,
    results: dict[str, SuiteResult],
    figure: Optional[FigureRecipe] = None,
) -> Path:
    """Write one CSV per curve plus manifest.json; returns the manifest path."""
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = {}
    for label, suite in results.items():
        fname = f"{label}.csv"
        write_curve_csv(out_dir / fname, suite)
        curves[label] = {
            "file": fname,
            "config": _config_json(plan.configs[label]),
            "final_mse_db_mean": (
                MSE_DB_FLOOR
                if suite.mean_mse_db[-1] == float("-inf")
                else float(suite.mean_mse_db[-1])
            ),
        }
    manifest = {
        "columns": list(CSV_COLUMNS),
        "mse_db_floor": MSE_DB_FLOOR,
        "seeds": list(plan.seeds),
        "curve_order": list(results.keys()),
        "curves": curves,
    }
    if figure is not None:
        manifest["figure"] = {"name": figure.name, "title": figure.title}
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# -- subcommands --------------------------------------------------------------


def cmd_run(args) -> int:
    plan = load_config(
        args.config,
        preset=args.preset,
        variants=args.variants.split(",") if args.variants else None,
        seeds=args.seeds,
    )
    results = run_suite(plan.configs, plan.seeds)
    manifest = write_bundle(Path(args.out), plan, results)
    for label, suite in results.items():
        print(f"{label}: final MSE {suite.mean_mse_db[-1]:.2f} dB")
    print(f"wrote {manifest}")
    return 0


def cmd_bound(args) -> int:
    plan = load_config(args.config, preset=args.preset)
    sim = Simulation(plan.base, seed=plan.seeds[0])
    bound = estimate_mu_bound(sim.population, sim.rff, args.samples)
    mu = plan.base.algo.mu
    print(f"estimated step-size bound: {bound:.6g}")
    print(f"configured mu: {mu:.6g}")
    if mu < bound:
        print("OK: mu is below the estimated bound")
    else:
        print("WARNING: mu is at or above the estimated bound; expect divergence")
    return 0


def cmd_figures(args) -> int:
    names = list(FIGURE_RECIPES) if args.name == "all" else [args.name]
    for name in names:
        recipe = FIGURE_RECIPES[name]
        plan = load_config(
            args.config,
            preset=recipe.setting,
            variants=recipe.variants,
            seeds=args.seeds,
        )
        results = run_suite(plan.configs, plan.seeds)
        manifest = write_bundle(Path(args.out) / name, plan, results, figure=recipe)
        print(f"wrote {manifest}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="paofed",
        description="Asynchronous partial-sharing federated learning simulator",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run configured variants, write CSV curves")
    p_run.add_argument("--config", help="JSON config path")
    p_run.add_argument("--preset", choices=sorted(SETTING_PRESETS))
    p_run.add_argument("--variants", help="comma-separated variant labels")
    p_run.add_argument("--seeds", help="seed count or comma-separated list")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(fn=cmd_run)

    p_bound = sub.add_parser("bound", help="print the empirical step-size bound")
    p_bound.add_argument("--config", help="JSON config path")
    p_bound.add_argument("--preset", choices=sorted(SETTING_PRESETS))
    p_bound.add_argument(
        "--samples",
        type=int,
        default=0,
        help="samples per client for the estimate (0 = full local sets)",
    )
    p_bound.set_defaults(fn=cmd_bound)

    p_fig = sub.add_parser("figures", help="reproduce a named figure bundle")
    p_fig.add_argument(
        "--name", default="all", choices=["all", *FIGURE_RECIPES]
    )
    p_fig.add_argument("--config", help="JSON config path")
    p_fig.add_argument("--seeds", help="seed count or comma-separated list")
    p_fig.add_argument("--out", required=True, help="output directory")
    p_fig.set_defaults(fn=cmd_figures)

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
