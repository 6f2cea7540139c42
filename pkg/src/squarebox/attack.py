"""Random-search attack driver: schedule, acceptance, budgeting, tracing.

The loop proposes a localized random update, projects it onto the threat
model, queries the classifier, and keeps the candidate only if the loss
strictly improves, stopping as soon as the iterate is adversarial or the
query budget is spent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import sampling_l2, sampling_linf
from .errors import AttackInterrupted
from .losses import AttackGoal, is_adversarial, make_loss
from .rng import Rng
from .tensors import ImageTensor, Norm, ThreatModel, project

# Halving breakpoints for the modified-fraction schedule at a 10000-query
# budget; other budgets rescale these proportionally (rounded half-up, min 1).
SCHEDULE_BREAKPOINTS = (10, 50, 200, 1000, 2000, 4000, 6000, 8000)


def side_length(p: float, w: int, norm: Norm) -> int:
    """Square side from the modified fraction p: closest integer to w*sqrt(p),
    at least 1 (3 for the l2 attack), at most w."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    h = max(int(math.floor(w * math.sqrt(p) + 0.5)), 1)
    if norm is Norm.L2:
        h = max(h, 3)
    return min(h, w)


def p_schedule(i: int, n_queries: int, p_init: float) -> float:
    """Piecewise-constant decay: p_init halved once per breakpoint passed."""
    halvings = 0
    for b in SCHEDULE_BREAKPOINTS:
        scaled = max(int(math.floor(b * n_queries / 10000 + 0.5)), 1)
        if i >= scaled:
            halvings += 1
    return p_init / (1 << halvings)


@dataclass(frozen=True)
class AttackConfig:
    tm: ThreatModel
    n_queries: int
    goal: AttackGoal
    seed: int
    p_init: float = 0.05
    update: str = ""  # "" picks the per-norm default
    init: str = ""
    loss: str = "auto"
    literal_init_loss: bool = False
    skip_null_updates: bool = False

    def __post_init__(self):
        if not 0.0 < self.p_init <= 1.0:
            raise ValueError(f"p_init must be in (0, 1], got {self.p_init}")
        if self.n_queries < 1:
            raise ValueError(f"n_queries must be >= 1, got {self.n_queries}")


@dataclass
class AttackResult:
    success: bool
    queries_used: int
    loss_trace: np.ndarray = field(repr=False)
    final_image: ImageTensor = field(repr=False)
    initial_class: int
    final_class: int


class _LinfSampler:
    norm = Norm.LINF

    def __init__(self, update: str, init: str, p_init: float):
        self.update = update or "square_c"
        self.init_kind = init or "vert_stripes"
        self.p_init = p_init
        if self.update not in sampling_linf.UPDATE_VARIANTS:
            raise ValueError(f"unknown linf update variant {self.update!r}")
        if self.init_kind not in sampling_linf.INIT_VARIANTS:
            raise ValueError(f"unknown linf init variant {self.init_kind!r}")

    def init(self, x, eps, rng):
        return sampling_linf.init_linf(x, eps, self.init_kind, rng, p_init=self.p_init)

    def propose(self, x_hat, x, eps, h, rng):
        c, w, _ = x.shape
        return sampling_linf.sample_delta_linf(eps, h, w, c, rng, self.update)


class _L2Sampler:
    norm = Norm.L2

    def __init__(self, update: str, init: str):
        self.update = update or "eta"
        self.init_kind = init or "eta_grid"
        if self.update not in sampling_l2.UPDATE_VARIANTS:
            raise ValueError(f"unknown l2 update variant {self.update!r}")
        if self.init_kind not in sampling_l2.INIT_VARIANTS:
            raise ValueError(f"unknown l2 init variant {self.init_kind!r}")

    def init(self, x, eps, rng):
        return sampling_l2.init_l2(x, eps, self.init_kind, rng)

    def propose(self, x_hat, x, eps, h, rng):
        return sampling_l2.sample_delta_l2(x_hat, x, eps, h, rng, self.update)


def make_sampler(config: AttackConfig):
    if config.tm.norm is Norm.LINF:
        return _LinfSampler(config.update, config.init, config.p_init)
    return _L2Sampler(config.update, config.init)


def run_attack(classifier, config: AttackConfig, x) -> AttackResult:
    """Attack one image within config.n_queries classifier queries.

    The initialized point's evaluation counts as query 1 and doubles as the
    first success check. With literal_init_loss the reference loss is taken at
    the clean point instead (query 1) and the initialized point costs a second
    query that only checks adversariality. A proposal whose projection changes
    nothing still spends its query unless skip_null_updates is set.

    Classifier failures are re-raised as AttackInterrupted carrying the
    queries spent so far.
    """
    x = np.asarray(x, dtype=np.float64)
    sampler = make_sampler(config)
    rng = Rng(config.seed)
    loss_fn = make_loss(config.goal, config.loss)
    eps, n_max = config.tm.eps, config.n_queries
    w = x.shape[1]

    queries = 0
    trace: list[float] = []

    def ask(image):
        nonlocal queries
        try:
            logits = classifier.query(image)
        except Exception as exc:
            raise AttackInterrupted(f"classifier query failed: {exc}", queries) from exc
        queries += 1
        return np.asarray(logits, dtype=np.float64)

    x_hat = project(sampler.init(x, eps, rng), x, config.tm)

    if config.literal_init_loss:
        logits = ask(x)
        l_star = loss_fn(logits)
        initial_class = int(np.argmax(logits))
        current_class = initial_class
        trace.append(l_star)
        done = False
        if queries < n_max:
            logits_hat = ask(x_hat)
            trace.append(l_star)
            current_class = int(np.argmax(logits_hat))
            done = is_adversarial(logits_hat, config.goal)
    else:
        logits = ask(x_hat)
        l_star = loss_fn(logits)
        initial_class = int(np.argmax(logits))
        current_class = initial_class
        trace.append(l_star)
        done = is_adversarial(logits, config.goal)

    i = 0
    round_cap = 20 * n_max
    while not done and queries < n_max and i < round_cap:
        i += 1
        p = p_schedule(i, n_max, config.p_init)
        h = side_length(p, w, config.tm.norm)
        proposal = sampler.propose(x_hat, x, eps, h, rng)
        x_new = project(x_hat + proposal.delta, x, config.tm)
        if config.skip_null_updates and np.array_equal(x_new, x_hat):
            continue
        logits = ask(x_new)
        l_new = loss_fn(logits)
        if l_new < l_star:
            x_hat, l_star = x_new, l_new
            current_class = int(np.argmax(logits))
            done = is_adversarial(logits, config.goal)
        trace.append(l_star)

    return AttackResult(
        success=done,
        queries_used=queries,
        loss_trace=np.asarray(trace, dtype=np.float64),
        final_image=ImageTensor(x_hat),
        initial_class=initial_class,
        final_class=current_class,
    )
