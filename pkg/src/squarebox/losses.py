"""Loss functions minimized by the random search, plus the success predicate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AttackGoal:
    """Untargeted (flip away from `label`) or targeted (reach `label`)."""

    targeted: bool
    label: int


def untargeted_goal(true_label: int) -> AttackGoal:
    return AttackGoal(False, int(true_label))


def targeted_goal(target_class: int) -> AttackGoal:
    return AttackGoal(True, int(target_class))


def _check_class(logits: np.ndarray, k: int) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64).ravel()
    if logits.size < 2:
        raise ValueError(f"need at least 2 classes, got {logits.size}")
    if not 0 <= k < logits.size:
        raise ValueError(f"class index {k} out of range for {logits.size} classes")
    return logits


def margin_loss(logits, y: int) -> float:
    """f_y - max over the other classes; negative iff misclassified."""
    logits = _check_class(logits, y)
    others = np.delete(logits, y)
    return float(logits[y] - others.max())


def logsumexp(logits: np.ndarray) -> float:
    logits = np.asarray(logits, dtype=np.float64).ravel()
    m = logits.max()
    return float(m + np.log(np.exp(logits - m).sum()))


def ce_targeted_loss(logits, t: int) -> float:
    """Cross-entropy of the target class, -f_t + logsumexp(f), max-shifted."""
    logits = _check_class(logits, t)
    return float(-logits[t] + logsumexp(logits))


def ce_untargeted_loss(logits, y: int) -> float:
    """f_y - logsumexp(f); minimizing drives the true-class probability down."""
    logits = _check_class(logits, y)
    return float(logits[y] - logsumexp(logits))


def margin_targeted_loss(logits, t: int) -> float:
    """-f_t + max over the other classes; the straightforward targeted margin."""
    logits = _check_class(logits, t)
    others = np.delete(logits, t)
    return float(others.max() - logits[t])


def is_adversarial(logits, goal: AttackGoal) -> bool:
    """Untargeted: argmax != label. Targeted: argmax == label. Lowest-index ties."""
    logits = _check_class(logits, goal.label)
    top = int(np.argmax(logits))
    return top == goal.label if goal.targeted else top != goal.label


def make_loss(goal: AttackGoal, kind: str = "auto"):
    """Loss callable for a goal. `auto` picks margin (untargeted) or CE (targeted)."""
    if kind == "auto":
        kind = "ce" if goal.targeted else "margin"
    if kind == "margin":
        fn = margin_targeted_loss if goal.targeted else margin_loss
    elif kind == "ce":
        fn = ce_targeted_loss if goal.targeted else ce_untargeted_loss
    else:
        raise ValueError(f"unknown loss kind {kind!r}; expected 'auto', 'margin', or 'ce'")
    label = goal.label
    return lambda logits: fn(logits, label)
