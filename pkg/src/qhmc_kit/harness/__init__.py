"""Experiment runner: configs, runners, artifact writers and the CLI."""

from .artifacts import RunArtifact, emit_artifacts, recompute_metrics, run_experiment
from .config import EXPERIMENTS, ExperimentConfig, default_config, load_config
from .experiments import ExperimentResult, bridge_regress, denoise, execute

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "ExperimentResult",
    "RunArtifact",
    "bridge_regress",
    "default_config",
    "denoise",
    "emit_artifacts",
    "execute",
    "load_config",
    "recompute_metrics",
    "run_experiment",
]
