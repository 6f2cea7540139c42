"""Executable checks of the method's theory.

* Square-count formula for the optimal update shape vs a brute-force
  placement count over the explicitly constructed shape.
* Convergence behaviour of the accept-if-better random search on smooth
  objectives (directional check: more iterations with 1/sqrt(T) step scaling
  reach smaller minimum gradient norms).
* Monte Carlo verification of the second-moment identity and the
  inner-product lower bound of the independent-signs sampler, plus the
  single-sign vs independent-signs comparison on block-constant directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rng import Rng
from .sampling_linf import sample_delta_linf


@dataclass(frozen=True)
class ShapeSpec:
    """Geometry of the near-square update shape: k cells arranged as an
    a x b rectangle (a = floor(sqrt(k)), b = floor(k/a)) plus an r-cell strip
    along the longer side, probed by an s x s filter."""

    k: int
    s: int

    def __post_init__(self):
        if self.s < 2:
            raise ValueError(f"filter side must be >= 2, got {self.s}")
        if self.k < self.s * self.s:
            raise ValueError(f"area {self.k} smaller than filter {self.s}x{self.s}")

    @property
    def a(self) -> int:
        return int(math.isqrt(self.k))

    @property
    def b(self) -> int:
        return self.k // self.a

    @property
    def r(self) -> int:
        return self.k - self.a * self.b


def n_star(k: int, s: int) -> int:
    """Maximal number of s x s squares contained in an area-k shape built from
    unit cells: (a-s+1)(b-s+1) + (r-s+1)^+."""
    spec = ShapeSpec(k, s)
    a, b, r = spec.a, spec.b, spec.r
    return (a - s + 1) * (b - s + 1) + max(r - s + 1, 0)


def brute_force_square_count(k: int, s: int) -> int:
    """Independent oracle: build the optimal shape (a x b rectangle plus an
    r-cell strip glued along the longer side) as an explicit cell set and
    count fully contained s x s placements exhaustively."""
    spec = ShapeSpec(k, s)
    a, b, r = spec.a, spec.b, spec.r
    cells = {(i, j) for i in range(a) for j in range(b)}
    cells |= {(a, j) for j in range(r)}
    count = 0
    for i in range(a + 2):
        for j in range(b + 2):
            if all((i + di, j + dj) in cells for di in range(s) for dj in range(s)):
                count += 1
    return count


@dataclass(frozen=True)
class SmoothObjective:
    """A smooth function with an oracle gradient (never used by the search)."""

    evaluate: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    smoothness: float

    def check_gradient(self, x: np.ndarray, step: float = 1e-6, tol: float = 1e-4) -> bool:
        """Central finite differences agree with the oracle gradient."""
        x = np.asarray(x, dtype=np.float64)
        g = self.gradient(x)
        fd = np.empty_like(x)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = step
            fd[i] = (self.evaluate(x + e) - self.evaluate(x - e)) / (2 * step)
        denom = max(float(np.linalg.norm(g)), 1.0)
        return float(np.linalg.norm(fd - g)) / denom < tol


def quadratic_objective() -> SmoothObjective:
    """g(x) = 0.5 ||x||^2, gradient x, smoothness constant 1."""
    return SmoothObjective(
        evaluate=lambda x: 0.5 * float(np.dot(x, x)),
        gradient=lambda x: np.asarray(x, dtype=np.float64),
        smoothness=1.0,
    )


@dataclass
class ConvergenceTrace:
    min_grad: np.ndarray = field(repr=False)  # running min of ||grad|| over iterates
    best_value: np.ndarray = field(repr=False)  # accepted objective values


def rs_convergence_trial(
    obj: SmoothObjective,
    x0: np.ndarray,
    T: int,
    gamma: float,
    h: int,
    eps: float,
    rng: Rng,
) -> ConvergenceTrace:
    """Accept-if-better random search on a smooth objective.

    Updates are independent-signs square draws (wraparound windows) on a
    w x w grid with d = w*w, scaled by the step size gamma/sqrt(T). Returns
    the running minimum of the oracle gradient norm (the search itself never
    sees gradients) and the monotone best-value trace.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    d = x.size
    w = int(math.isqrt(d))
    if w * w != d:
        raise ValueError(f"dimension {d} is not a perfect square")
    step = gamma / math.sqrt(T)

    best = obj.evaluate(x)
    min_grad = float(np.linalg.norm(obj.gradient(x)))
    grads = [min_grad]
    values = [best]
    for _ in range(T):
        delta = step * sample_delta_linf(eps, h, w, 1, rng, "square_ch2").delta.ravel()
        cand = x + delta
        val = obj.evaluate(cand)
        if val < best:
            x, best = cand, val
            min_grad = min(min_grad, float(np.linalg.norm(obj.gradient(x))))
        grads.append(min_grad)
        values.append(best)
    return ConvergenceTrace(np.asarray(grads), np.asarray(values))


def checkerboard_direction(w: int, c: int) -> np.ndarray:
    """The alternating +-1 direction v_{k,l} = (-1)^(k+l), replicated per
    channel; every 2x2 window of it sums to zero exactly."""
    k = np.arange(1, w + 1)
    plane = np.where((k[:, None] + k[None, :]) % 2 == 0, 1.0, -1.0)
    return np.broadcast_to(plane, (c, w, w)).copy()


@dataclass
class KhintchineReport:
    trials: int
    var_mc: float
    var_mc_stderr: float
    var_exact: float
    inner_mc: float
    inner_mc_stderr: float
    inner_bound: float  # sqrt(2) * eps * h^2 / w^2 * ||v||
    inner_bound_display: float  # sqrt(2) * c * eps * h^2 / d * ||v|| (same value)


class _MeanAccumulator:
    """Streaming mean and standard error from chunked samples."""

    def __init__(self):
        self.n = 0
        self.total = 0.0
        self.total_sq = 0.0

    def add(self, samples: np.ndarray) -> None:
        self.n += samples.size
        self.total += float(samples.sum())
        self.total_sq += float(np.sum(samples * samples))

    @property
    def mean(self) -> float:
        return self.total / self.n

    @property
    def stderr(self) -> float:
        var = max(self.total_sq / self.n - self.mean**2, 0.0) * self.n / (self.n - 1)
        return math.sqrt(var / self.n)


_MC_CHUNK = 50_000


def khintchine_check(
    w: int, h: int, eps: float, c: int, v: np.ndarray, trials: int, rng: Rng
) -> KhintchineReport:
    """Monte Carlo E||delta||^2 and E|<delta, v>| for the independent-signs
    sampler with wraparound windows, against the analytic identity 4*c*eps^2*h^2
    and the lower bound sqrt(2)*eps*h^2/w^2 * ||v||_2."""
    v = np.asarray(v, dtype=np.float64).reshape(c, w, w)
    idx = np.arange(h)
    inner_acc = _MeanAccumulator()
    sq_acc = _MeanAccumulator()
    left = trials
    # One draw = window position r, s in {0..w} (wraparound) + c*h*h signs;
    # drawn in chunks to keep memory flat.
    while left > 0:
        n = min(left, _MC_CHUNK)
        left -= n
        rows = rng.integers(0, w, (n,))
        cols = rng.integers(0, w, (n,))
        signs = 2.0 * eps * rng.rademacher((n, c, h, h))
        rr = (rows[:, None] + idx[None, :]) % w  # (n, h)
        cc = (cols[:, None] + idx[None, :]) % w
        vwin = v[:, rr[:, :, None], cc[:, None, :]].transpose(1, 0, 2, 3)
        inner_acc.add(np.abs(np.einsum("tchk,tchk->t", signs, vwin)))
        sq_acc.add(np.einsum("tchk,tchk->t", signs, signs))

    norm_v = float(np.linalg.norm(v.ravel()))
    d = c * w * w
    return KhintchineReport(
        trials=trials,
        var_mc=sq_acc.mean,
        var_mc_stderr=sq_acc.stderr,
        var_exact=4.0 * c * eps**2 * h**2,
        inner_mc=inner_acc.mean,
        inner_mc_stderr=inner_acc.stderr,
        inner_bound=math.sqrt(2.0) * eps * h**2 / w**2 * norm_v,
        inner_bound_display=math.sqrt(2.0) * c * eps * h**2 / d * norm_v,
    )


@dataclass
class SignCountReport:
    single_mc: float
    single_stderr: float
    single_exact: float  # 2 * eps * h^2 / w^2 * ||v||_1 for block-constant v
    multiple_mc: float
    multiple_stderr: float


def single_vs_multiple_check(
    w: int, h: int, eps: float, v: np.ndarray, trials: int, rng: Rng
) -> SignCountReport:
    """E|<delta, v>| for the block-grid single-sign and independent-signs
    samplers on a block-constant direction v (w divisible by h).

    Both samplers pick one block of the (w/h)^2 grid uniformly; the single-sign
    sampler fills it with one +-2eps value, the other with independent signs.
    For block-constant v the single-sign expectation is exactly
    2*eps*h^2/w^2 * ||v||_1.
    """
    if w % h != 0:
        raise ValueError(f"block grid needs h | w, got w={w}, h={h}")
    v = np.asarray(v, dtype=np.float64).reshape(w, w)
    n_blocks = w // h
    blocks = v.reshape(n_blocks, h, n_blocks, h).transpose(0, 2, 1, 3)  # (br, bc, h, h)
    single_acc = _MeanAccumulator()
    multiple_acc = _MeanAccumulator()
    left = trials
    # Draw order per trial: block row, block col, single sign, h*h signs.
    while left > 0:
        n = min(left, _MC_CHUNK)
        left -= n
        br = rng.integers(0, n_blocks - 1, (n,))
        bc = rng.integers(0, n_blocks - 1, (n,))
        single_sign = rng.rademacher((n,))
        multi_sign = rng.rademacher((n, h, h))
        vwin = blocks[br, bc]  # (n, h, h)
        single_acc.add(np.abs(2.0 * eps * single_sign * vwin.sum(axis=(1, 2))))
        multiple_acc.add(np.abs(2.0 * eps * np.einsum("thk,thk->t", multi_sign, vwin)))
    return SignCountReport(
        single_mc=single_acc.mean,
        single_stderr=single_acc.stderr,
        single_exact=2.0 * eps * h**2 / w**2 * float(np.abs(v).sum()),
        multiple_mc=multiple_acc.mean,
        multiple_stderr=multiple_acc.stderr,
    )


def run_analysis(seed: int = 0, trials: int = 100_000, conv_seeds: int = 5) -> dict:
    """All theory checks at report scale; returns a JSON-friendly summary."""
    checks = []

    mismatches = [
        (k, s)
        for s in (2, 3, 4, 5)
        for k in range(s * s, 121)
        if n_star(k, s) != brute_force_square_count(k, s)
    ]
    checks.append(
        {
            "name": "square_count_formula_vs_brute_force",
            "passed": not mismatches,
            "details": {"pairs_checked": sum(121 - s * s for s in (2, 3, 4, 5)),
                        "mismatches": mismatches},
        }
    )

    rng = Rng(seed)
    w, c, eps = 16, 3, 0.05
    v = checkerboard_direction(w, c)
    dots = []
    for _ in range(2000):
        delta = sample_delta_linf(eps, 2, w, c, rng, "square_c").delta
        dots.append(float(np.sum(v * delta)))
    max_abs_dot = max(abs(x) for x in dots)
    checks.append(
        {
            "name": "checkerboard_orthogonality_h2",
            "passed": max_abs_dot == 0.0,
            "details": {"draws": len(dots), "max_abs_inner_product": max_abs_dot},
        }
    )

    rng = Rng(seed + 1)
    vdir = rng.normal((3, 12, 12))
    rep = khintchine_check(12, 4, 0.1, 3, vdir, trials, Rng(seed + 2))
    var_ok = abs(rep.var_mc - rep.var_exact) <= 3 * rep.var_mc_stderr + 1e-9 * rep.var_exact
    inner_ok = rep.inner_mc >= rep.inner_bound - 3 * rep.inner_mc_stderr
    checks.append(
        {
            "name": "second_moment_identity",
            "passed": bool(var_ok),
            "details": {"mc": rep.var_mc, "exact": rep.var_exact,
                        "stderr": rep.var_mc_stderr},
        }
    )
    checks.append(
        {
            "name": "inner_product_lower_bound",
            "passed": bool(inner_ok),
            "details": {"mc": rep.inner_mc, "bound": rep.inner_bound,
                        "bound_display_form": rep.inner_bound_display,
                        "stderr": rep.inner_mc_stderr},
        }
    )

    h, w2 = 4, 16
    block = np.zeros((w2, w2))
    block[:h, :h] = 1.0
    sc = single_vs_multiple_check(w2, h, 0.1, block, trials, Rng(seed + 3))
    checks.append(
        {
            "name": "single_sign_beats_multiple_on_constant_blocks",
            "passed": bool(
                sc.single_mc > sc.multiple_mc
                and abs(sc.single_mc - sc.single_exact) <= 3 * sc.single_stderr + 1e-12
            ),
            "details": {"single_mc": sc.single_mc, "single_exact": sc.single_exact,
                        "multiple_mc": sc.multiple_mc},
        }
    )

    obj = quadratic_objective()
    short, long_ = [], []
    for s in range(conv_seeds):
        x0 = Rng(seed + 100 + s).normal((100,))
        x0 *= 10.0 / np.linalg.norm(x0)
        short.append(
            rs_convergence_trial(obj, x0, 100, 1.0, 3, 0.25, Rng(seed + 200 + s)).min_grad[-1]
        )
        long_.append(
            rs_convergence_trial(obj, x0, 10_000, 1.0, 3, 0.25, Rng(seed + 200 + s)).min_grad[-1]
        )
    checks.append(
        {
            "name": "random_search_convergence_direction",
            "passed": bool(np.mean(long_) < np.mean(short)),
            "details": {"seeds": conv_seeds, "mean_min_grad_T100": float(np.mean(short)),
                        "mean_min_grad_T10000": float(np.mean(long_))},
        }
    )

    return {"passed": all(c["passed"] for c in checks), "checks": checks}
