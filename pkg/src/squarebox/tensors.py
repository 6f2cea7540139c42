"""Image tensors, threat models, and lp-ball projections.

Values are float64 in memory; file formats store float32 (see ``inference`` and
``dataset`` for the wire layout). Images live in the box [0, 1]^d with shape
(channels, side, side).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError


class Norm(enum.Enum):
    LINF = "linf"
    L2 = "l2"

    @classmethod
    def parse(cls, name: str) -> "Norm":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown norm {name!r}; expected 'linf' or 'l2'") from None


@dataclass(frozen=True)
class ThreatModel:
    """Perturbation constraint: lp ball of radius eps around the clean image."""

    norm: Norm
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")


@dataclass(frozen=True)
class ImageTensor:
    """A (channels, side, side) float64 array with every entry in [0, 1]."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ShapeMismatchError(f"expected (c, w, w) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def side(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return int(self.data.size)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)


def lp_norm(t: np.ndarray, norm: Norm) -> float:
    """max-abs for LINF, Euclidean norm for L2; empty arrays give 0."""
    t = np.asarray(t, dtype=np.float64)
    if t.size == 0:
        return 0.0
    if norm is Norm.LINF:
        return float(np.abs(t).max())
    return float(np.linalg.norm(t.ravel()))


def project(candidate: np.ndarray, x: np.ndarray, tm: ThreatModel) -> np.ndarray:
    """Project a candidate onto the lp ball around x intersected with [0, 1]^d.

    LINF clips componentwise to [x - eps, x + eps]; L2 rescales the difference
    to norm eps when outside the ball. Both finish with a box clip.
    """
    candidate = np.asarray(candidate, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if candidate.shape != x.shape:
        raise ShapeMismatchError(
            f"candidate shape {candidate.shape} != reference shape {x.shape}"
        )
    if tm.norm is Norm.LINF:
        out = np.clip(candidate, x - tm.eps, x + tm.eps)
    else:
        diff = candidate - x
        n = lp_norm(diff, Norm.L2)
        # The few-ulp slack keeps re-projection an exact no-op: a rescaled,
        # clipped point lands within eps*(1 + ~5e-16) and must not trigger
        # again. Stays far inside the 1e-12 feasibility tolerance.
        if n > tm.eps * (1.0 + 1e-14):
            diff = diff * (tm.eps / n)
        out = x + diff
    np.clip(out, 0.0, 1.0, out=out)
    return out
