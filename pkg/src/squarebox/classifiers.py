"""The score-returning query interface the attack sees, with query counting."""

from __future__ import annotations

import threading

import numpy as np

from .inference import Model


class CountingClassifier:
    """Wraps a local model behind `query`, counting every call.

    The counter uses a lock so a batch harness may attack different images
    concurrently against one shared classifier.
    """

    def __init__(self, model: Model):
        self.model = model
        self.num_classes = model.num_classes
        self._count = 0
        self._lock = threading.Lock()

    def query(self, image) -> np.ndarray:
        logits = self.model.forward(image)
        with self._lock:
            self._count += 1
        return logits

    @property
    def query_count(self) -> int:
        with self._lock:
            return self._count

    def reset_count(self) -> None:
        with self._lock:
            self._count = 0


class OracleClassifier:
    """Adapts any logits function to the query interface (tests, analysis)."""

    def __init__(self, fn, num_classes: int):
        self._fn = fn
        self.num_classes = int(num_classes)
        self._count = 0
        self._lock = threading.Lock()

    def query(self, image) -> np.ndarray:
        logits = np.asarray(self._fn(np.asarray(image, dtype=np.float64)), dtype=np.float64)
        with self._lock:
            self._count += 1
        return logits

    @property
    def query_count(self) -> int:
        with self._lock:
            return self._count

    def reset_count(self) -> None:
        with self._lock:
            self._count = 0
