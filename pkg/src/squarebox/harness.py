"""Batch evaluation: per-image attacks with restarts, metrics, JSONL output.

Metric conventions: the failure rate is 1 - n_success / n_initially_correct,
and query statistics (average, median) cover only successful attacks on points
that were classified correctly (untargeted) or not yet as the target
(targeted) before the attack.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .attack import AttackConfig, run_attack
from .classifiers import CountingClassifier
from .errors import SquareboxError
from .losses import AttackGoal

# Restart r of image i runs with seed + r * 2**32 + i * 2**48.
RESTART_SEED_STRIDE = 1 << 32
IMAGE_SEED_STRIDE = 1 << 48


def derive_seed(base_seed: int, image_index: int, restart_index: int) -> int:
    return base_seed + restart_index * RESTART_SEED_STRIDE + image_index * IMAGE_SEED_STRIDE


@dataclass
class BatchStats:
    n_points: int
    n_initially_correct: int
    n_success: int
    failure_rate: float | None
    avg_queries: float | None
    median_queries: float | None
    success_curve: list[tuple[int, float]]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["success_curve"] = [[int(q), float(r)] for q, r in self.success_curve]
        return d


def default_budgets(n_queries: int) -> list[int]:
    """1-2-5 ladder up to and including the full budget."""
    budgets = []
    step = 1
    while step <= n_queries:
        for mult in (1, 2, 5):
            v = mult * step
            if v <= n_queries:
                budgets.append(v)
        step *= 10
    if not budgets or budgets[-1] != n_queries:
        budgets.append(n_queries)
    return budgets


def _attack_one(classifier, config: AttackConfig, ds, idx: int, restarts: int) -> dict:
    image = ds.images[idx]
    label = int(ds.labels[idx])
    if config.goal.targeted:
        if ds.targets is None:
            raise SquareboxError("targeted mode requires a dataset with targets")
        label = int(ds.targets[idx])
    if not 0 <= label < classifier.num_classes:
        return {
            "idx": idx,
            "skipped": True,
            "error": f"label {label} out of range for {classifier.num_classes} classes",
            "success": False,
            "queries": None,
            "total_queries": 0,
            "restart_index": None,
            "initial_class": None,
            "final_class": None,
            "final_loss": None,
        }
    goal = AttackGoal(config.goal.targeted, label)

    clean_class = int(np.argmax(classifier.model.forward(image)))
    already_done = (clean_class == label) if goal.targeted else (clean_class != label)
    if already_done:
        return {
            "idx": idx,
            "skipped": True,
            "success": False,
            "queries": None,
            "total_queries": 0,
            "restart_index": None,
            "initial_class": clean_class,
            "final_class": clean_class,
            "final_loss": None,
        }

    total_queries = 0
    record = None
    for r in range(restarts):
        cfg = dataclasses.replace(config, goal=goal, seed=derive_seed(config.seed, idx, r))
        try:
            result = run_attack(classifier, cfg, image)
        except SquareboxError as exc:
            record = {
                "idx": idx,
                "skipped": False,
                "error": str(exc),
                "success": False,
                "queries": None,
                "total_queries": total_queries + getattr(exc, "queries_used", 0),
                "restart_index": None,
                "initial_class": clean_class,
                "final_class": None,
                "final_loss": None,
            }
            return record
        total_queries += result.queries_used
        if result.success:
            return {
                "idx": idx,
                "skipped": False,
                "success": True,
                "queries": result.queries_used,
                "total_queries": total_queries,
                "restart_index": r,
                "initial_class": clean_class,
                "final_class": result.final_class,
                "final_loss": float(result.loss_trace[-1]),
            }
        record = result
    return {
        "idx": idx,
        "skipped": False,
        "success": False,
        "queries": None,
        "total_queries": total_queries,
        "restart_index": None,
        "initial_class": clean_class,
        "final_class": record.final_class,
        "final_loss": float(record.loss_trace[-1]),
    }


def aggregate_curve(records: list[dict], budgets: list[int]) -> list[tuple[int, float]]:
    """Success fraction among eligible points at each query budget."""
    eligible = [r for r in records if not r["skipped"]]
    curve = []
    for q in budgets:
        if eligible:
            hits = sum(1 for r in eligible if r["success"] and r["queries"] <= q)
            curve.append((int(q), hits / len(eligible)))
        else:
            curve.append((int(q), 0.0))
    return curve


def compute_stats(records: list[dict], budgets: list[int]) -> BatchStats:
    eligible = [r for r in records if not r["skipped"]]
    successes = [r for r in eligible if r["success"]]
    queries = sorted(r["queries"] for r in successes)
    n_eligible = len(eligible)
    return BatchStats(
        n_points=len(records),
        n_initially_correct=n_eligible,
        n_success=len(successes),
        failure_rate=(1.0 - len(successes) / n_eligible) if n_eligible else None,
        avg_queries=float(np.mean(queries)) if queries else None,
        median_queries=float(np.median(queries)) if queries else None,
        success_curve=aggregate_curve(records, budgets),
    )


def run_batch(
    model,
    ds,
    config: AttackConfig,
    restarts: int = 1,
    jobs: int = 1,
    budgets: list[int] | None = None,
) -> tuple[list[dict], BatchStats]:
    """Attack every dataset image; returns per-image records (in index order)
    plus aggregate statistics."""
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    classifier = model if isinstance(model, CountingClassifier) else CountingClassifier(model)
    if budgets is None:
        budgets = default_budgets(config.n_queries)

    indices = range(len(ds))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(
                pool.map(lambda i: _attack_one(classifier, config, ds, i, restarts), indices)
            )
    else:
        records = [_attack_one(classifier, config, ds, i, restarts) for i in indices]
    return records, compute_stats(records, budgets)


def write_jsonl(records: list[dict], stats: BatchStats, path) -> None:
    """One object per image in index order, then a trailing summary object."""
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
        f.write(json.dumps({"summary": stats.to_dict()}, sort_keys=True) + "\n")


def write_curve_csv(stats: BatchStats, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("budget,success_rate\n")
        for q, rate in stats.success_curve:
            f.write(f"{q},{rate!r}\n")
