"""Semi-supervised offline RL: proxy-labelled trajectories from an inverse dynamics model."""

from ._core import (
    StageError,
    augmentation_schedule,
    bootstrap_ci,
    config_hash,
    coupled_split,
    default_config,
    emit_report,
    finite_grid_posteriors,
    generate_dataset,
    iqm,
    load_dataset,
    mean,
    mixture_variance,
    relative_performance_gap,
    run_ablation,
    run_coupled_sweep,
    run_pipeline,
)

__all__ = [name for name in dir() if not name.startswith("_")]
