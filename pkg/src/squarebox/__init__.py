"""squarebox: a score-based black-box adversarial attack engine.

Random search with localized square-shaped updates against l-inf and l2
threat models, a miniature feed-forward inference engine, a remote-classifier
client, a batch evaluation harness, and an analysis suite that runs the
method's theory as executable checks.
"""

from .attack import AttackConfig, AttackResult, p_schedule, run_attack, side_length
from .classifiers import CountingClassifier, OracleClassifier
from .dataset import Dataset, load_dataset, save_dataset
from .inference import LayerSpec, Model, forward, load_model, predict, save_model
from .losses import AttackGoal, ce_targeted_loss, is_adversarial, margin_loss
from .rng import Rng
from .tensors import ImageTensor, Norm, ThreatModel, lp_norm, project

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackResult",
    "AttackGoal",
    "CountingClassifier",
    "Dataset",
    "ImageTensor",
    "LayerSpec",
    "Model",
    "Norm",
    "OracleClassifier",
    "Rng",
    "ThreatModel",
    "ce_targeted_loss",
    "forward",
    "is_adversarial",
    "load_dataset",
    "load_model",
    "lp_norm",
    "margin_loss",
    "p_schedule",
    "predict",
    "project",
    "run_attack",
    "save_dataset",
    "save_model",
    "side_length",
]
