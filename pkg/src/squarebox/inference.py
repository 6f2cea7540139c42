"""Minimal feed-forward classifier engine: the desk-scale black box under attack.

Supported layers: dense, conv2d (zero padding, integer stride, no dilation),
relu, softplus, flatten. Models load from a JSON manifest plus a raw
little-endian float32 weight blob; weights are stored in layer order, dense as
row-major (out, in) then bias, conv2d as (out, in, kh, kw) then bias. Math runs
in float64.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    ManifestError,
    ShapeMismatchError,
    UnknownLayerError,
    WeightCountError,
)

LAYER_KINDS = ("dense", "conv2d", "relu", "softplus", "flatten")

MODEL_FORMAT = "squarebox-model-v1"


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    out_dim: int = 0
    in_dim: int = 0
    out_channels: int = 0
    in_channels: int = 0
    kernel_h: int = 0
    kernel_w: int = 0
    stride: int = 1
    padding: int = 0

    def weight_count(self) -> int:
        if self.kind == "dense":
            return self.out_dim * self.in_dim + self.out_dim
        if self.kind == "conv2d":
            return (
                self.out_channels * self.in_channels * self.kernel_h * self.kernel_w
                + self.out_channels
            )
        return 0


def _layer_from_manifest(entry: dict) -> LayerSpec:
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ManifestError(f"layer entry must be an object with a 'kind': {entry!r}")
    kind = entry["kind"]
    if kind not in LAYER_KINDS:
        raise UnknownLayerError(f"unknown layer kind {kind!r}")
    try:
        if kind == "dense":
            spec = LayerSpec(kind, out_dim=int(entry["out_dim"]), in_dim=int(entry["in_dim"]))
            if spec.out_dim <= 0 or spec.in_dim <= 0:
                raise ManifestError(f"dense dims must be positive: {entry!r}")
        elif kind == "conv2d":
            spec = LayerSpec(
                kind,
                out_channels=int(entry["out_channels"]),
                in_channels=int(entry["in_channels"]),
                kernel_h=int(entry["kernel_h"]),
                kernel_w=int(entry["kernel_w"]),
                stride=int(entry.get("stride", 1)),
                padding=int(entry.get("padding", 0)),
            )
            if min(spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w) <= 0:
                raise ManifestError(f"conv2d dims must be positive: {entry!r}")
            if spec.stride <= 0 or spec.padding < 0:
                raise ManifestError(f"conv2d stride/padding invalid: {entry!r}")
        else:
            spec = LayerSpec(kind)
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"malformed layer entry {entry!r}: {exc}") from exc
    return spec


def _shape_after(spec: LayerSpec, shape):
    """Propagate a ('spatial', c, h, w) or ('flat', d) shape through one layer."""
    if spec.kind == "conv2d":
        if shape[0] != "spatial":
            raise ManifestError("conv2d requires a spatial (c, h, w) input")
        _, c, h, w = shape
        if c != spec.in_channels:
            raise ManifestError(
                f"conv2d expects {spec.in_channels} input channels, got {c}"
            )
        ho = (h + 2 * spec.padding - spec.kernel_h) // spec.stride + 1
        wo = (w + 2 * spec.padding - spec.kernel_w) // spec.stride + 1
        if ho <= 0 or wo <= 0:
            raise ManifestError(f"conv2d output collapses to {ho}x{wo}")
        return ("spatial", spec.out_channels, ho, wo)
    if spec.kind == "flatten":
        if shape[0] == "flat":
            return shape
        _, c, h, w = shape
        return ("flat", c * h * w)
    if spec.kind == "dense":
        d = shape[1] if shape[0] == "flat" else shape[1] * shape[2] * shape[3]
        if d != spec.in_dim:
            raise ManifestError(f"dense expects in_dim {spec.in_dim}, got {d}")
        return ("flat", spec.out_dim)
    return shape  # relu / softplus


class Model:
    """An ordered layer list plus per-layer weights; immutable once built."""

    def __init__(self, layers, weights, num_classes: int, input_shape):
        self.layers: tuple[LayerSpec, ...] = tuple(layers)
        self.weights = tuple(weights)  # per layer: (W, b) arrays or None
        self.num_classes = int(num_classes)
        self.input_shape = tuple(int(v) for v in input_shape)  # (c, w, w)
        self._validate()

    def _validate(self):
        if self.num_classes < 2:
            raise ManifestError(f"num_classes must be >= 2, got {self.num_classes}")
        c, w, w2 = self.input_shape
        if w != w2 or c <= 0 or w <= 0:
            raise ManifestError(f"input_shape must be (c, w, w), got {self.input_shape}")
        shape = ("spatial", c, w, w)
        for spec in self.layers:
            shape = _shape_after(spec, shape)
        out_dim = shape[1] if shape[0] == "flat" else shape[1] * shape[2] * shape[3]
        if out_dim != self.num_classes:
            raise ManifestError(
                f"network outputs {out_dim} values but num_classes is {self.num_classes}"
            )

    @property
    def dim(self) -> int:
        c, w, _ = self.input_shape
        return c * w * w

    def forward(self, image) -> np.ndarray:
        """Logits for one image; a pure, deterministic function of (model, image)."""
        x = np.asarray(image, dtype=np.float64)
        if x.shape != self.input_shape:
            raise ShapeMismatchError(
                f"input shape {x.shape} != model input {self.input_shape}"
            )
        spatial = True
        for spec, wts in zip(self.layers, self.weights):
            if spec.kind == "conv2d":
                if not spatial:
                    raise ShapeMismatchError("conv2d applied to flat activations")
                x = kernels.conv2d_forward(x, wts[0], wts[1], spec.stride, spec.padding)
            elif spec.kind == "dense":
                if spatial:
                    x = x.ravel()
                    spatial = False
                x = kernels.dense_forward(x, wts[0], wts[1])
            elif spec.kind == "flatten":
                if spatial:
                    x = x.ravel()
                    spatial = False
            elif spec.kind == "relu":
                x = np.maximum(x, 0.0)
            elif spec.kind == "softplus":
                x = np.logaddexp(0.0, x)
        return x.ravel()

    def predict(self, image) -> int:
        """Argmax class; ties broken by the lowest index."""
        return int(np.argmax(self.forward(image)))


def forward(model: Model, image) -> np.ndarray:
    return model.forward(image)


def predict(model: Model, image) -> int:
    return model.predict(image)


def _split_weights(layers, blob: np.ndarray):
    weights = []
    offset = 0
    total = sum(spec.weight_count() for spec in layers)
    if blob.size != total:
        raise WeightCountError(
            f"weight blob holds {blob.size} floats but the manifest requires {total}"
        )
    for spec in layers:
        if spec.kind == "dense":
            n_w = spec.out_dim * spec.in_dim
            w = blob[offset : offset + n_w].reshape(spec.out_dim, spec.in_dim)
            b = blob[offset + n_w : offset + n_w + spec.out_dim]
            offset += n_w + spec.out_dim
            weights.append((np.ascontiguousarray(w), np.ascontiguousarray(b)))
        elif spec.kind == "conv2d":
            n_w = spec.out_channels * spec.in_channels * spec.kernel_h * spec.kernel_w
            w = blob[offset : offset + n_w].reshape(
                spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w
            )
            b = blob[offset + n_w : offset + n_w + spec.out_channels]
            offset += n_w + spec.out_channels
            weights.append((np.ascontiguousarray(w), np.ascontiguousarray(b)))
        else:
            weights.append(None)
    return weights


def load_model(path) -> Model:
    """Load a model from a `model.json` manifest plus its weight blob."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            manifest = json.load(f)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict):
        raise ManifestError("manifest must be a JSON object")
    for key in ("num_classes", "input_shape", "layers"):
        if key not in manifest:
            raise ManifestError(f"manifest missing required key {key!r}")
    layers = [_layer_from_manifest(e) for e in manifest["layers"]]
    blob_name = manifest.get("weights_file", "model.bin")
    blob_path = path.parent / blob_name
    raw = np.fromfile(blob_path, dtype="<f4").astype(np.float64)
    weights = _split_weights(layers, raw)
    try:
        input_shape = tuple(int(v) for v in manifest["input_shape"])
        num_classes = int(manifest["num_classes"])
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"malformed manifest fields: {exc}") from exc
    if len(input_shape) != 3:
        raise ManifestError(f"input_shape must have 3 entries, got {input_shape}")
    return Model(layers, weights, num_classes, input_shape)


def save_model(model: Model, manifest_path) -> None:
    """Write `model.json` + `model.bin` next to each other."""
    manifest_path = Path(manifest_path)
    entries = []
    for spec in model.layers:
        if spec.kind == "dense":
            entries.append({"kind": "dense", "out_dim": spec.out_dim, "in_dim": spec.in_dim})
        elif spec.kind == "conv2d":
            entries.append(
                {
                    "kind": "conv2d",
                    "out_channels": spec.out_channels,
                    "in_channels": spec.in_channels,
                    "kernel_h": spec.kernel_h,
                    "kernel_w": spec.kernel_w,
                    "stride": spec.stride,
                    "padding": spec.padding,
                }
            )
        else:
            entries.append({"kind": spec.kind})
    blob_name = manifest_path.stem + ".bin"
    manifest = {
        "format": MODEL_FORMAT,
        "num_classes": model.num_classes,
        "input_shape": list(model.input_shape),
        "layers": entries,
        "weights_file": blob_name,
    }
    parts = []
    for wts in model.weights:
        if wts is not None:
            parts.append(wts[0].ravel())
            parts.append(wts[1].ravel())
    blob = (
        np.concatenate(parts).astype("<f4")
        if parts
        else np.empty(0, dtype="<f4")
    )
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    blob.tofile(manifest_path.parent / blob_name)
