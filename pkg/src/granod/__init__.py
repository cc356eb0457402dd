"""Outlier detection in mixed tabular data with density-weighted fuzzy granules,
multi-scale granular balls, three-way fusion and a weighted SVM refiner."""

__version__ = "0.1.0"

from .dataset import DataError, InjectionSpec, MixedDataset, inject_outliers, load_dataset, normalize
from .evaluation import auroc, friedman_statistic, nemenyi_cd, precision_recall
from .fgd import order_attributes, outlier_scores
from .fusion import PipelineConfig, PipelineResult, run_pipeline

__all__ = [
    "DataError", "InjectionSpec", "MixedDataset", "PipelineConfig", "PipelineResult",
    "auroc", "friedman_statistic", "inject_outliers", "load_dataset", "nemenyi_cd",
    "normalize", "order_attributes", "outlier_scores", "precision_recall", "run_pipeline",
]
