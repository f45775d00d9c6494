"""CLI commands for formation, completion analysis, learning and evaluation experiments."""

import sys
from pathlib import Path
from typing import Optional, Sequence

import fire
from fire.core import FireExit

from uav_channel_gan.completion import (
    baseline_loads,
    comm_load,
    completion_curve,
    completion_time,
    recursion_oracle,
)
from uav_channel_gan.config import ExperimentConfig, load_config
from uav_channel_gan.data_loader import create_datasets
from uav_channel_gan.dataset import (
    Dataset,
    load_datasets_csv,
    load_datasets_json,
    save_datasets_csv,
    save_datasets_json,
)
from uav_channel_gan.exceptions import (
    CompletionNotAttainedError,
    ConfigError,
    InfeasibleError,
    UavChannelGanError,
)
from uav_channel_gan.experiments import (
    form_network,
    run_learning_comparison,
    run_rate_evaluation,
    run_sweep,
)
from uav_channel_gan.reporting import provenance, write_json, write_table
from uav_channel_gan.spread import spread_simulator
from uav_channel_gan.topology import audit_constraints
from uav_channel_gan.train import equilibrium_check, global_distribution, train_network
from uav_channel_gan.utils import finish_mlflow, setup_mlflow

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def _prepare(
    config: str,
    config_path: str,
    overrides: Sequence[str],
    seed: Optional[int],
    out: Optional[str],
    format: Optional[str],
) -> tuple[ExperimentConfig, Path, str]:
    overrides = [str(o) for o in overrides]
    if seed is not None:
        overrides.append(f"experiment.seed={int(seed)}")
    cfg = load_config(config, config_path, overrides)
    fmt = format or cfg.experiment.format
    if fmt not in ("csv", "json"):
        raise ConfigError(f"--format must be csv or json, got {fmt}")
    return cfg, Path(out or cfg.experiment.output_dir), fmt


def _header(cfg: ExperimentConfig, command: str, **extra) -> dict:
    return provenance({"command": command, **cfg.to_params(), **extra})


def _save_datasets(datasets: Sequence[Dataset], out_dir: Path, fmt: str) -> Path:
    path = out_dir / f"datasets.{fmt}"
    if fmt == "json":
        save_datasets_json(datasets, path)
    else:
        save_datasets_csv(datasets, path)
    return path


def _load_datasets(path: str, num_conditions: int, num_uavs: int) -> list[Dataset]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Datasets file not found: {path}")
    if path.suffix == ".json":
        datasets = load_datasets_json(path)
    elif path.suffix == ".csv":
        datasets = load_datasets_csv(path, num_conditions)
    else:
        raise ConfigError(f"Datasets file must be .csv or .json, got {path.name}")
    owners = sorted(d.owner_id for d in datasets)
    if owners != list(range(num_uavs)):
        raise ConfigError(f"{path.name} holds datasets of UAVs {owners}, expected {num_uavs}")
    print(f"Loaded {len(datasets)} datasets from {path}")
    return sorted(datasets, key=lambda d: d.owner_id)


def formation(
    *overrides: str,
    config: str = "defaults",
    config_path: str = "configs",
    seed: Optional[int] = None,
    out: Optional[str] = None,
    format: Optional[str] = None,
) -> None:
    """
    Form the UAV exchange graph and write its edges with their link budgets.

    Args:
        overrides: Hydra overrides, e.g. topology.rb_budget=8
        config: "defaults" or a path to a primary config file
        config_path: Configs directory
        seed: Seed override
        out: Output directory
        format: csv or json
    """
    cfg, out_dir, fmt = _prepare(config, config_path, overrides, seed, out, format)
    setup = form_network(cfg)
    graph = setup.graph
    violations = audit_constraints(graph, cfg.constraints())
    for v in violations:
        print(f"Warning: {v}")

    header = _header(
        cfg,
        "formation",
        num_edges=graph.num_edges,
        l_max=setup.params.l_max,
        l_loop_min=setup.params.l_loop_min,
        strongly_connected=graph.is_strongly_connected(),
    )
    if fmt == "json":
        path = write_json(out_dir / "formation.json", graph.to_dict(), header)
    else:
        rows = [graph.budget(i, j).to_dict() for i, j in graph.edges]
        path = write_table(out_dir, "formation", rows, header, fmt)
    print(f"Graph written to {path}")


def completion(
    *overrides: str,
    config: str = "defaults",
    config_path: str = "configs",
    seed: Optional[int] = None,
    out: Optional[str] = None,
    format: Optional[str] = None,
    max_iterations: Optional[int] = None,
    monte_carlo: bool = False,
) -> None:
    """
    Write the completion-probability curve of the formed network with T_G, C and the loads.

    Args:
        overrides: Hydra overrides
        config: "defaults" or a path to a primary config file
        config_path: Configs directory
        seed: Seed override (used by the Monte-Carlo column)
        out: Output directory
        format: csv or json
        max_iterations: Last iteration of the curve (defaults to max(T_G, 30))
        monte_carlo: Add a Monte-Carlo column from the spread simulator
    """
    cfg, out_dir, fmt = _prepare(config, config_path, overrides, seed, out, format)
    setup = form_network(cfg)
    params, T_G = setup.params, setup.iterations
    last = int(max_iterations or max(T_G, cfg.experiment.spread_max_iterations))
    curve = completion_curve(params, last)
    spread = None
    if monte_carlo:
        spread = spread_simulator(
            setup.graph,
            params,
            cfg.experiment.spread_trials,
            cfg.experiment.seed,
            max_iterations=last,
            n_jobs=cfg.experiment.n_jobs,
            show_progress=cfg.logging.show_progress,
        )

    rows = []
    for T in range(last + 1):
        row = {"T": T, "p_closed_form": curve[T]}
        row["p_oracle"] = recursion_oracle(T, params) if T <= params.loop_start else None
        if spread is not None:
            row["p_monte_carlo"] = float(spread.probabilities[T])
            row["stderr"] = float(spread.stderr[T])
        rows.append(row)

    load = comm_load(params, T_G)
    loads = baseline_loads(
        params, cfg.experiment.model_param_count, T_G, num_uavs=cfg.scenario.num_uavs
    )
    header = _header(
        cfg,
        "completion",
        T_G=T_G,
        completion_time_s=completion_time(params, T_G),
        comm_load_scalars=load.scalars,
        comm_load_bits=load.bits,
        clamped=curve.clamped,
        **{f"loads.{k}": v for k, v in loads.to_dict().items()},
    )
    path = write_table(out_dir, "completion_curve", rows, header, fmt)
    print(f"T_G = {T_G}, C = {completion_time(params, T_G):.2f} s; curve written to {path}")


def spread_sim(
    *overrides: str,
    config: str = "defaults",
    config_path: str = "configs",
    seed: Optional[int] = None,
    out: Optional[str] = None,
    format: Optional[str] = None,
    trials: Optional[int] = None,
) -> None:
    """
    Monte-Carlo simulation of information spread over the formed network.

    Args:
        overrides: Hydra overrides
        config: "defaults" or a path to a primary config file
        config_path: Configs directory
        seed: Seed override
        out: Output directory
        format: csv or json
        trials: Number of trials (defaults to experiment.spread_trials)
    """
    cfg, out_dir, fmt = _prepare(config, config_path, overrides, seed, out, format)
    setup = form_network(cfg)
    trials = int(trials or cfg.experiment.spread_trials)
    curve = spread_simulator(
        setup.graph,
        setup.params,
        trials,
        cfg.experiment.seed,
        max_iterations=max(cfg.experiment.spread_max_iterations, setup.iterations),
        n_jobs=cfg.experiment.n_jobs,
        show_progress=cfg.logging.show_progress,
    )
    rows = [
        {
            "T": T,
            "p_monte_carlo": float(curve.probabilities[T]),
            "stderr": float(curve.stderr[T]),
            "p_arrival": float(curve.arrival[T]),
        }
        for T in range(curve.max_iterations + 1)
    ]
    header = _header(cfg, "spread-sim", trials=trials, source=curve.source, target=curve.target)
    path = write_table(out_dir, "spread_curve", rows, header, fmt)
    print(f"Spread curve written to {path}")


def train(
    *overrides: str,
    config: str = "defaults",
    config_path: str = "configs",
    seed: Optional[int] = None,
    out: Optional[str] = None,
    format: Optional[str] = None,
    rounds: Optional[int] = None,
    datasets_path: Optional[str] = None,
) -> None:
    """
    Collect the regional datasets and run the distributed exchange protocol.

    Writes the datasets, per-round metrics, the equilibrium report and one JSON snapshot per
    generator.

    Args:
        overrides: Hydra overrides
        config: "defaults" or a path to a primary config file
        config_path: Configs directory
        seed: Seed override
        out: Output directory
        format: csv or json
        rounds: Number of rounds (defaults to learning.rounds, then T_G)
        datasets_path: Train on datasets saved by an earlier run (.csv or .json) instead of
            collecting new ones
    """
    cfg, out_dir, fmt = _prepare(config, config_path, overrides, seed, out, format)
    seed = cfg.experiment.seed
    show = cfg.logging.show_progress
    setup = form_network(cfg)
    rounds = rounds if rounds is not None else cfg.learning.rounds
    rounds = int(rounds if rounds is not None else setup.iterations)

    print("=" * 50)
    print(f"Training on {cfg.scenario.num_uavs} UAVs, T_G = {setup.iterations}")
    print("=" * 50)

    env, codebook, grid = cfg.environment(), cfg.codebook(), cfg.grid()
    if datasets_path is not None:
        datasets = _load_datasets(datasets_path, codebook.size, cfg.scenario.num_uavs)
    else:
        datasets = create_datasets(env, codebook, cfg.scenario.dataset_size, seed, show)
    _save_datasets(datasets, out_dir, fmt)
    mlflow_active = setup_mlflow(
        cfg.logging.mlflow_uri, cfg.logging.experiment_name, {**cfg.to_params(), "rounds": rounds}
    )
    try:
        result = train_network(
            datasets,
            setup.graph,
            grid,
            cfg.learning_params(),
            rounds,
            seed,
            mlflow_active=mlflow_active,
            show_progress=show,
        )
    finally:
        finish_mlflow(mlflow_active)

    report = equilibrium_check(result.states, global_distribution(datasets, grid))
    header = _header(cfg, "train", rounds=rounds, T_G=setup.iterations)
    write_table(out_dir, "training_metrics", result.history, header, fmt)
    write_table(out_dir, "equilibrium", [vars(u) for u in report.uavs], header, fmt)
    for state in result.states:
        state.generator.save_json(out_dir / "models" / f"generator_uav{state.uav_id}.json")
    status = "reached" if report.passed else "not reached"
    print(f"Equilibrium {status}; results written to {out_dir}")


def compare(
    *overrides: str,
    config: str = "defaults",
    config_path: str = "configs",
    seed: Optional[int] = None,
    out: Optional[str] = None,
    format: Optional[str] = None,
) -> None:
    """
    Compare stand-alone, distributed and centralized learners and the baseline loads.

    Args:
        overrides: Hydra overrides
        config: "defaults" or a path to a primary config file
        config_path: Configs directory
        seed: Seed override
        out: Output directory
        format: csv or json
    """
    cfg, out_dir, fmt = _prepare(config, config_path, overrides, seed, out, format)
    result = run_learning_comparison(cfg)
    header = _header(cfg, "compare")
    write_table(out_dir, "learning_comparison", result.rows, header, fmt)
    path = write_table(out_dir, "load_comparison", [result.loads.to_dict()], header, fmt)
    print(f"Comparison written to {path.parent}")


def eval_rate(
    *overrides: str,
    config: str = "defaults",
    config_path: str = "configs",
    seed: Optional[int] = None,
    out: Optional[str] = None,
    format: Optional[str] = None,
) -> None:
    """
    Downlink rate with perfect CSI, distributed and stand-alone MAP beam selection.

    Args:
        overrides: Hydra overrides
        config: "defaults" or a path to a primary config file
        config_path: Configs directory
        seed: Seed override
        out: Output directory
        format: csv or json
    """
    cfg, out_dir, fmt = _prepare(config, config_path, overrides, seed, out, format)
    results = run_rate_evaluation(cfg)
    header = _header(cfg, "eval-rate")
    path = write_table(out_dir, "downlink_rate", [r.to_dict() for r in results], header, fmt)
    print(f"Rates written to {path}")


def sweep(
    *overrides: str,
    axis: str = "B",
    config: str = "defaults",
    config_path: str = "configs",
    seed: Optional[int] = None,
    out: Optional[str] = None,
    format: Optional[str] = None,
    learning: bool = False,
    monte_carlo: bool = True,
) -> None:
    """
    Sweep one of B, I, eta, epsilon and write T_G, C and the load per point.

    Args:
        overrides: Hydra overrides
        axis: Sweep axis
        config: "defaults" or a path to a primary config file
        config_path: Configs directory
        seed: Seed override
        out: Output directory
        format: csv or json
        learning: Also train the learners and evaluate the downlink rate at every point
        monte_carlo: Run the spread simulator at every point
    """
    cfg, out_dir, fmt = _prepare(config, config_path, overrides, seed, out, format)
    mlflow_active = setup_mlflow(
        cfg.logging.mlflow_uri, cfg.logging.experiment_name, {**cfg.to_params(), "axis": axis}
    )
    try:
        result = run_sweep(
            cfg,
            str(axis),
            with_spread=monte_carlo,
            with_learning=learning,
            show_progress=cfg.logging.show_progress,
        )
    finally:
        finish_mlflow(mlflow_active)
    header = _header(cfg, "sweep", axis=axis)
    path = write_table(out_dir, f"sweep_{axis}", result.to_rows(), header, fmt)
    print(f"Sweep written to {path}")


COMMANDS = {
    "formation": formation,
    "completion": completion,
    "spread-sim": spread_sim,
    "train": train,
    "compare": compare,
    "eval-rate": eval_rate,
    "sweep": sweep,
}


def cli_dispatch(argv: Sequence[str]) -> int:
    """
    Run one subcommand and map failures to exit statuses.

    Returns:
        0 on success, 2 on configuration or usage errors, 3 on infeasibility
    """
    try:
        fire.Fire(COMMANDS, command=list(argv), name="uav-channel-gan")
    except FireExit as e:
        return EXIT_OK if not e.code else EXIT_CONFIG
    except ConfigError as e:
        print(f"Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleError, CompletionNotAttainedError) as e:
        print(f"Infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except UavChannelGanError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    return EXIT_OK


def main():
    """Main entry point."""
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
