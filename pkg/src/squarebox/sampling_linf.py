"""Proposal distributions and initializations for the l-infinity attack.

Update variants (CLI names match the ablation-table rows):

* ``square_c``    -- one h x h window, one +-2eps sign per channel (default)
* ``square_ch2``  -- h x h window with independent +-2eps entries; the window
                     position is drawn from {0, ..., w} and wraps around the
                     image edges
* ``square_1``    -- one h x h window, a single sign shared by all channels
* ``rect_c``      -- rectangle with Exp(1)-scaled sides, one sign per channel
* ``random_c``    -- c*h^2 scattered components, one sign per channel
* ``random_ch2``  -- c*h^2 scattered components, independent signs

Initializations: ``vert_stripes`` (default), ``horiz_stripes``,
``uniform_rand``, ``rand_squares``.

Draw order is part of the determinism contract and is documented per function.
"""

from __future__ import annotations

import numpy as np

from .proposals import UpdateProposal, Window
from .rng import Rng

UPDATE_VARIANTS = ("square_c", "square_ch2", "square_1", "rect_c", "random_c", "random_ch2")
INIT_VARIANTS = ("vert_stripes", "horiz_stripes", "uniform_rand", "rand_squares")


def _stripes(x: np.ndarray, eps: float, rng: Rng, vertical: bool) -> np.ndarray:
    c, w, _ = x.shape
    signs = rng.rademacher((c, w))
    delta = eps * (signs[:, None, :] if vertical else signs[:, :, None])
    return np.clip(x + delta, 0.0, 1.0)


def init_linf(x: np.ndarray, eps: float, variant: str, rng: Rng, p_init: float = 0.05) -> np.ndarray:
    """Initial iterate for the l-inf attack, already clipped to the box.

    vert_stripes draws one sign per (channel, column), in that array order;
    horiz_stripes per (channel, row). uniform_rand perturbs every component by
    U[-eps, eps). rand_squares stamps 5 squares of side side_length(p_init, w)
    (draw order per square: row, col, then one sign per channel); later squares
    overwrite earlier ones so modified entries sit at exactly +-eps before
    clipping.
    """
    x = np.asarray(x, dtype=np.float64)
    c, w, _ = x.shape
    if variant == "vert_stripes":
        return _stripes(x, eps, rng, vertical=True)
    if variant == "horiz_stripes":
        return _stripes(x, eps, rng, vertical=False)
    if variant == "uniform_rand":
        delta = eps * (2.0 * rng.uniform((c, w, w)) - 1.0)
        return np.clip(x + delta, 0.0, 1.0)
    if variant == "rand_squares":
        from .attack import side_length
        from .tensors import Norm

        h = side_length(p_init, w, Norm.LINF)
        delta = np.zeros_like(x)
        for _ in range(5):
            r = rng.integers(0, w - h)
            s = rng.integers(0, w - h)
            signs = rng.rademacher(c)
            delta[:, r : r + h, s : s + h] = eps * signs[:, None, None]
        return np.clip(x + delta, 0.0, 1.0)
    raise ValueError(f"unknown linf init variant {variant!r}")


def sample_delta_linf(
    eps: float, h: int, w: int, c: int, rng: Rng, variant: str = "square_c"
) -> UpdateProposal:
    """One raw update draw; the attack core projects it afterwards.

    Draw orders: square_c/square_1 draw row, col, then sign(s). square_ch2
    draws row, col from {0, ..., w} (wraparound windows), then per channel an
    h x h sign block in row-major order. rect_c draws the two Exp(1) side
    factors, then row, col, then per-channel signs. random_c/random_ch2 draw
    the component positions (a uniform k-subset of the flat (c, w, w) index
    space), then the signs.
    """
    if not 1 <= h <= w:
        raise ValueError(f"window side {h} outside [1, {w}]")
    delta = np.zeros((c, w, w), dtype=np.float64)

    if variant in ("square_c", "square_1"):
        r = rng.integers(0, w - h)
        s = rng.integers(0, w - h)
        signs = rng.rademacher(c) if variant == "square_c" else np.full(c, rng.rademacher())
        delta[:, r : r + h, s : s + h] = 2.0 * eps * signs[:, None, None]
        return UpdateProposal(delta, (Window(r, s, h, h),))

    if variant == "square_ch2":
        r = rng.integers(0, w)
        s = rng.integers(0, w)
        rows = (r + np.arange(h)) % w
        cols = (s + np.arange(h)) % w
        for i in range(c):
            block = 2.0 * eps * rng.rademacher((h, h))
            delta[i, rows[:, None], cols[None, :]] = block
        return UpdateProposal(delta, (Window(r, s, h, h, wrapped=True),))

    if variant == "rect_c":
        alpha = rng.exponential()
        beta = rng.exponential()
        hr = min(max(int(np.floor(alpha * h + 0.5)), 1), w)
        hc = min(max(int(np.floor(beta * h + 0.5)), 1), w)
        r = rng.integers(0, w - hr)
        s = rng.integers(0, w - hc)
        signs = rng.rademacher(c)
        delta[:, r : r + hr, s : s + hc] = 2.0 * eps * signs[:, None, None]
        return UpdateProposal(delta, (Window(r, s, hr, hc),))

    if variant in ("random_c", "random_ch2"):
        k = min(c * h * h, c * w * w)
        flat = rng.choice_no_replace(c * w * w, k)
        if variant == "random_ch2":
            values = 2.0 * eps * rng.rademacher(k)
        else:
            signs = rng.rademacher(c)
            values = 2.0 * eps * signs[flat // (w * w)]
        delta.ravel()[flat] = values
        return UpdateProposal(delta, ())

    raise ValueError(f"unknown linf update variant {variant!r}")
