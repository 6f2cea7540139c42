"""Dataset files: a JSON manifest plus a little-endian float32 image blob.

Images are concatenated channel-major, one (c, w, w) block per image, in the
manifest's declared order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError, LabelError, TruncatedBlobError
from .tensors import ImageTensor

DATASET_FORMAT = "squarebox-dataset-v1"


@dataclass(frozen=True)
class Dataset:
    images: tuple[ImageTensor, ...]
    labels: tuple[int, ...]
    targets: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.labels) != len(self.images):
            raise LabelError(
                f"{len(self.labels)} labels for {len(self.images)} images"
            )
        if self.targets is not None and len(self.targets) != len(self.images):
            raise LabelError(
                f"{len(self.targets)} targets for {len(self.images)} images"
            )

    def __len__(self) -> int:
        return len(self.images)


def load_dataset(path) -> Dataset:
    """Load and validate a dataset manifest + blob pair."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            manifest = json.load(f)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"manifest is not valid JSON: {exc}") from exc
    try:
        count = int(manifest["count"])
        shape = tuple(int(v) for v in manifest["shape"])
        labels = [int(v) for v in manifest["labels"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"malformed dataset manifest: {exc}") from exc
    if len(shape) != 3 or shape[1] != shape[2]:
        raise DatasetError(f"shape must be (c, w, w), got {shape}")
    if len(labels) != count:
        raise LabelError(f"{len(labels)} labels declared for count {count}")
    targets = None
    if manifest.get("targets") is not None:
        targets = [int(v) for v in manifest["targets"]]
        if len(targets) != count:
            raise LabelError(f"{len(targets)} targets declared for count {count}")

    blob_path = path.parent / manifest.get("images_file", "dataset.bin")
    raw = np.fromfile(blob_path, dtype="<f4")
    per_image = int(np.prod(shape))
    if raw.size < count * per_image:
        raise TruncatedBlobError(
            f"blob holds {raw.size} floats, need {count * per_image}"
        )
    raw = raw[: count * per_image].astype(np.float64).reshape((count,) + shape)
    try:
        images = tuple(ImageTensor(img) for img in raw)
    except ValueError as exc:
        raise DatasetError(f"image values invalid: {exc}") from exc
    return Dataset(images, tuple(labels), tuple(targets) if targets else None)


def save_dataset(ds: Dataset, manifest_path) -> None:
    manifest_path = Path(manifest_path)
    shape = ds.images[0].data.shape
    blob_name = manifest_path.stem + ".bin"
    manifest = {
        "format": DATASET_FORMAT,
        "count": len(ds),
        "shape": list(shape),
        "labels": list(ds.labels),
        "images_file": blob_name,
    }
    if ds.targets is not None:
        manifest["targets"] = list(ds.targets)
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    blob = np.stack([img.data for img in ds.images]).astype("<f4")
    blob.tofile(manifest_path.parent / blob_name)
