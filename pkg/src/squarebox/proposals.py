"""Candidate-update container shared by the sampling distributions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Window:
    """Axis-aligned window: rows [row, row+height), cols [col, col+width).

    With `wrapped` set, indices are taken modulo the image side.
    """

    row: int
    col: int
    height: int
    width: int
    wrapped: bool = False

    def row_indices(self, side: int) -> np.ndarray:
        idx = self.row + np.arange(self.height)
        return idx % side if self.wrapped else idx

    def col_indices(self, side: int) -> np.ndarray:
        idx = self.col + np.arange(self.width)
        return idx % side if self.wrapped else idx


@dataclass(frozen=True)
class UpdateProposal:
    """A raw candidate update delta, tagged with the geometry that produced it."""

    delta: np.ndarray = field(repr=False)
    windows: tuple[Window, ...] = ()
