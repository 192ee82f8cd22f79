"""Failure localization in networks from end-to-end path measurements with missing data."""

from .faultsim import Dataset, generate_dataset, path_failure_probability, simulate_transfers
from .impute import ImputationResult, ImputerConfig, imputation_rmse, impute, mean_fill
from .localize import (
    Localizer,
    predict_failures,
    score_mse,
    score_r2,
    top_k,
    top_k_accuracy,
    train_localizer,
)
from .missing import Mask, MaskedMatrix, apply_mask, sample_mask
from .pipeline import EvalReport, ExperimentConfig, run_pipeline
from .topology import Topology, build_preset, component_list, compute_routes, path_index

__version__ = "0.1.0"
