"""Proposal distribution and initializations for the l2 attack.

The update moves perturbation mass between two randomly placed windows while
keeping the iterate exactly on the eps-sphere around the clean image (before
the box clip); the window content is a two-center pattern with a positive and
a negative bump decaying away from their centers.

Update variants: ``eta`` (two-center, default), ``eta_single`` (one center),
``eta_rand`` (two-center with independent per-entry sign flips).
Initializations: ``eta_grid`` (default), ``gaussian``, ``uniform``,
``vert_stripes``.
"""

from __future__ import annotations

import numpy as np

from .proposals import UpdateProposal, Window
from .rng import Rng

UPDATE_VARIANTS = ("eta", "eta_single", "eta_rand")
INIT_VARIANTS = ("eta_grid", "gaussian", "uniform", "vert_stripes")


def eta_base(h1: int, h2: int) -> np.ndarray:
    """The decaying bump pattern on an h1 x h2 grid (h1 >= h2 >= 1).

    With n = floor(h1/2), entry (r, s) (1-based) is the partial sum
    sum_{k=0..M} 1/(n+1-k)^2 where M = n - max(|r-n-1|, |s-floor(h2/2)-1|);
    the entry peaks at the center cell and every entry is strictly positive.
    """
    if not h1 >= h2 >= 1:
        raise ValueError(f"need h1 >= h2 >= 1, got ({h1}, {h2})")
    n = h1 // 2
    csum = np.cumsum(1.0 / (n + 1 - np.arange(n + 1)) ** 2)
    r = np.arange(1, h1 + 1)[:, None]
    s = np.arange(1, h2 + 1)[None, :]
    m = n - np.maximum(np.abs(r - n - 1), np.abs(s - h2 // 2 - 1))
    return csum[m]


def eta_square(h: int, rng: Rng) -> np.ndarray:
    """Two-center square update: positive and negative bumps side by side.

    Columns split at k = floor(h/2); one Rademacher draw picks between that
    layout and its transpose (the 90-degree rotation).
    """
    k = h // 2
    parts = []
    if k >= 1:
        parts.append(eta_base(h, k))
    parts.append(-eta_base(h, h - k))
    eta = np.hstack(parts)
    if rng.rademacher() < 0:
        eta = eta.T.copy()
    return eta


def _tile_bounds(w: int, n_tiles: int):
    side = w // n_tiles
    bounds = [(i * side, (i + 1) * side if i < n_tiles - 1 else w) for i in range(n_tiles)]
    return bounds


def init_l2(x: np.ndarray, eps: float, variant: str, rng: Rng) -> np.ndarray:
    """Initial iterate for the l2 attack; pre-clip perturbation norm is eps.

    eta_grid tiles the image 5x5 (tile side floor(w/5), last row/column absorb
    the remainder; one tile when w < 5) and fills each tile per channel with an
    independent two-center draw (tiles row-major, channels inner; a rectangular
    remainder tile takes the top-left crop of a draw of its longer side), then
    rescales the whole perturbation to norm eps. gaussian is a uniform
    direction on the eps-sphere; uniform sits on the corners +-eps/sqrt(d);
    vert_stripes uses width-one stripes of magnitude eps/sqrt(d) (one sign per
    channel and column). All variants clip to the box afterwards.
    """
    x = np.asarray(x, dtype=np.float64)
    c, w, _ = x.shape
    d = x.size
    if variant == "eta_grid":
        n_tiles = 5 if w >= 5 else 1
        bounds = _tile_bounds(w, n_tiles)
        delta = np.zeros_like(x)
        for r0, r1 in bounds:
            for c0, c1 in bounds:
                th, tw = r1 - r0, c1 - c0
                for i in range(c):
                    patch = eta_square(max(th, tw), rng)[:th, :tw]
                    delta[i, r0:r1, c0:c1] = patch
        delta *= eps / np.linalg.norm(delta.ravel())
    elif variant == "gaussian":
        z = rng.normal((c, w, w))
        delta = z * (eps / np.linalg.norm(z.ravel()))
    elif variant == "uniform":
        delta = (eps / np.sqrt(d)) * rng.rademacher((c, w, w))
    elif variant == "vert_stripes":
        signs = rng.rademacher((c, w))
        delta = (eps / np.sqrt(d)) * np.broadcast_to(signs[:, None, :], x.shape)
    else:
        raise ValueError(f"unknown l2 init variant {variant!r}")
    return np.clip(x + delta, 0.0, 1.0)


def _window_sq_norm(plane: np.ndarray, win: Window) -> float:
    v = plane[win.row : win.row + win.height, win.col : win.col + win.width]
    return float(np.sum(v * v))


def _union_sq_norm(plane: np.ndarray, w1: Window, w2: Window) -> float:
    total = _window_sq_norm(plane, w1) + _window_sq_norm(plane, w2)
    r0, r1 = max(w1.row, w2.row), min(w1.row, w2.row) + w1.height
    c0, c1 = max(w1.col, w2.col), min(w1.col, w2.col) + w1.width
    if r1 > r0 and c1 > c0:
        inter = plane[r0:r1, c0:c1]
        total -= float(np.sum(inter * inter))
    return total


def sample_delta_l2(
    x_hat: np.ndarray,
    x: np.ndarray,
    eps: float,
    h: int,
    rng: Rng,
    variant: str = "eta",
) -> UpdateProposal:
    """One l2 update: recycle the mass of window W2 into new content in W1.

    Requires ||x_hat - x||_2 <= eps. The returned delta puts x_hat + delta
    exactly on the eps-sphere around x (up to float rounding); the attack core
    still projects and box-clips it. Draw order: W1 row, W1 col, W2 row,
    W2 col, the pattern orientation (skipped for eta_single), then per channel
    the sign draw (a scalar, or an h x h block for eta_rand, row-major).
    Budget lost to earlier box clipping re-enters split evenly over channels;
    a window whose existing content has zero norm contributes only the
    pattern term.
    """
    x_hat = np.asarray(x_hat, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    c, w, _ = x.shape
    if not 1 <= h <= w:
        raise ValueError(f"window side {h} outside [1, {w}]")

    nu = x_hat - x
    r1 = rng.integers(0, w - h)
    s1 = rng.integers(0, w - h)
    r2 = rng.integers(0, w - h)
    s2 = rng.integers(0, w - h)
    w1 = Window(r1, s1, h, h)
    w2 = Window(r2, s2, h, h)

    eps_unused_sq = max(eps * eps - float(np.sum(nu * nu)), 0.0)

    if variant == "eta_single":
        eta = eta_base(h, h)
    elif variant in ("eta", "eta_rand"):
        eta = eta_square(h, rng)
    else:
        raise ValueError(f"unknown l2 update variant {variant!r}")
    eta_star = eta / np.linalg.norm(eta.ravel())

    for i in range(c):
        rho = rng.rademacher((h, h)) if variant == "eta_rand" else rng.rademacher()
        old_w1 = nu[i, r1 : r1 + h, s1 : s1 + h].copy()
        n1 = np.linalg.norm(old_w1.ravel())
        nu_temp = rho * eta_star + (old_w1 / n1 if n1 > 0.0 else 0.0)
        nt = np.linalg.norm(nu_temp.ravel())
        if nt == 0.0:
            nu_temp, nt = rho * eta_star, 1.0
        eps_avail = np.sqrt(_union_sq_norm(nu[i], w1, w2) + eps_unused_sq / c)
        nu[i, r2 : r2 + h, s2 : s2 + h] = 0.0
        nu[i, r1 : r1 + h, s1 : s1 + h] = (nu_temp / nt) * eps_avail

    delta = x + nu - x_hat
    return UpdateProposal(delta, (w1, w2))
