"""Reference numpy implementations of the forward-pass kernels."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv2d_forward(
    x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int, pad: int
) -> np.ndarray:
    """Cross-correlation of x (cin, H, W) with w (cout, cin, kh, kw) plus bias.

    Zero padding of `pad` on every spatial border, integer stride, no dilation.
    """
    cin, hh, ww = x.shape
    cout, _, kh, kw = w.shape
    if pad > 0:
        x = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(x, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]
    out = np.einsum("ihwkl,oikl->ohw", windows, w, optimize=True)
    return out + b[:, None, None]


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map w (out, in) @ x (in,) + b (out,)."""
    return w @ x + b
