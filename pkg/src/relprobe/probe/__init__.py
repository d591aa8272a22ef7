from .model import MLPProbe, ProbeArchitecture, ProbeError, gradient_check
from .train import (
    Adam,
    ExperimentResult,
    PlateauScheduler,
    RunMetrics,
    TrainingConfig,
    compose_input,
    draw_perturbation,
    evaluate,
    metrics_from_confusion,
    run_experiment,
    train_probe,
)

__all__ = [
    "Adam",
    "ExperimentResult",
    "MLPProbe",
    "PlateauScheduler",
    "ProbeArchitecture",
    "ProbeError",
    "RunMetrics",
    "TrainingConfig",
    "compose_input",
    "draw_perturbation",
    "evaluate",
    "gradient_check",
    "metrics_from_confusion",
    "run_experiment",
    "train_probe",
]
