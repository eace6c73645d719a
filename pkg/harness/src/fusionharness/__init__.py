"""Toy-scale dual-stream fusion training harness.

Trains concatenation-fusion classifiers (and mono-stream baselines) on
paired original + multi-feature radiograph images over subject-disjoint
k-fold splits, reporting accuracy, per-class precision/recall/F1 and
confusion matrices.
"""

from .data import PairedDataset, load_paired_dataset, make_toy_dataset, read_manifest
from .folds import FoldError, FoldPlan, fold_split, make_fold_plan
from .metrics import LABELS, MetricsReport, compute_metrics, confusion_matrix
from .models import MODES, FusionSpec, build_model
from .train import Hyperparams, evaluate, run_experiment, train_fold, training_accuracy

__version__ = "0.1.0"
