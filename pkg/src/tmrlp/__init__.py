"""Robust graph-based semi-supervised label propagation."""

from .alptmr import RecoveredModel, SolverConfig, classify, fit
from .baselines import general_lp, gfhf, llgc, predict_labels
from .data import (CorruptionSpec, Dataset, SplitSpec, corrupt_gaussian, load_dataset,
                   one_hot_Y, split, synth_blobs, synth_two_moons)
from .estimators import ALPTMRClassifier, GFHFClassifier, LLGCClassifier
from .exceptions import NumericalError, SingularSystem, TmrError, ValidationError
from .graph import baseline_graph, knn, lle_weights
from .harness import (ExperimentConfig, MetricsReport, ablation, dump_matrices, grid_search,
                      inter_class_mass, run_experiment)
from .oos import extend, extend_batch, predict_new

__version__ = "0.1.0"

__all__ = [
    "ALPTMRClassifier", "CorruptionSpec", "Dataset", "ExperimentConfig", "GFHFClassifier",
    "LLGCClassifier", "MetricsReport", "NumericalError", "RecoveredModel", "SingularSystem",
    "SolverConfig", "SplitSpec", "TmrError", "ValidationError", "ablation", "baseline_graph",
    "classify", "corrupt_gaussian", "dump_matrices", "extend", "extend_batch", "fit",
    "general_lp", "gfhf", "grid_search", "inter_class_mass", "knn", "lle_weights", "llgc",
    "load_dataset", "one_hot_Y", "predict_labels", "predict_new", "run_experiment", "split",
    "synth_blobs", "synth_two_moons",
]
