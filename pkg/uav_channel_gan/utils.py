"""Utility functions: unit conversions, seeding, provenance and run tracking."""

from typing import Dict, List, Optional

import mlflow
import numpy as np


def db_to_linear(value_db: float) -> float:
    """Convert a power ratio from dB to linear scale."""
    return float(10.0 ** (value_db / 10.0))


def linear_to_db(value: float) -> float:
    """Convert a linear power ratio to dB (-inf for zero)."""
    if value <= 0.0:
        return float("-inf")
    return float(10.0 * np.log10(value))


def dbm_to_watts(value_dbm: float) -> float:
    """Convert dBm to watts."""
    return float(10.0 ** ((value_dbm - 30.0) / 10.0))


def noise_power_watts(
    psd_dbm_per_hz: float, bandwidth_hz: float, noise_figure_db: float = 0.0
) -> float:
    """
    Thermal noise power over a band.

    Args:
        psd_dbm_per_hz: Noise power spectral density in dBm/Hz
        bandwidth_hz: Bandwidth in Hz
        noise_figure_db: Receiver noise figure in dB

    Returns:
        Noise power in watts
    """
    return dbm_to_watts(psd_dbm_per_hz + 10.0 * np.log10(bandwidth_hz) + noise_figure_db)


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    """Independent child generators derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def get_git_commit_id() -> str:
    """Get current git commit ID."""
    try:
        import git

        repo = git.Repo(search_parent_directories=True)
        return repo.head.object.hexsha[:8]
    except Exception:
        return "unknown"


def setup_mlflow(mlflow_uri: Optional[str], experiment_name: str, params: Dict) -> bool:
    """
    Start MLflow tracking if a tracking URI is configured.

    Args:
        mlflow_uri: MLflow tracking URI (None disables tracking)
        experiment_name: Experiment to log into
        params: Run parameters; the git commit id is added automatically

    Returns:
        True if tracking is active
    """
    if not mlflow_uri:
        return False
    try:
        mlflow.set_tracking_uri(mlflow_uri)
        experiment = mlflow.get_experiment_by_name(experiment_name)
        if experiment is None:
            mlflow.create_experiment(experiment_name)
        mlflow.set_experiment(experiment_name)
        mlflow.log_params({**params, "git_commit_id": get_git_commit_id()})
        print("MLflow logging enabled")
        return True
    except Exception as e:
        print(f"MLflow not available ({e}), continuing without MLflow")
        return False


def log_mlflow_metrics(active: bool, metrics: Dict[str, float], step: int) -> None:
    """Log metrics to the active MLflow run, warning instead of failing."""
    if not active:
        return
    try:
        mlflow.log_metrics(metrics, step=step)
    except Exception as e:
        print(f"Warning: MLflow logging failed: {e}")


def finish_mlflow(active: bool) -> None:
    if not active:
        return
    try:
        mlflow.end_run()
    except Exception as e:
        print(f"Warning: MLflow end_run failed: {e}")
