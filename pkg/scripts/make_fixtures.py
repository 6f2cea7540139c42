#!/usr/bin/env python3
"""Generate the committed test fixtures: a small trained convolutional
classifier (tests/fixtures/model.json + model.bin) and a held-out dataset
(tests/fixtures/dataset.json + dataset.bin).

The task is a synthetic 10-class texture problem on 28x28 grayscale images:
each class is a smooth random template, samples add pixel noise. The model is
trained with torch (only needed by this script; the shipped fixtures are plain
squarebox files) and exported as float32 blobs. Deterministic given the seeds
below; the fixtures are committed, so rerunning this script is only needed to
regenerate them from scratch.

Usage: python3 scripts/make_fixtures.py [--out tests/fixtures]
"""

import argparse
from pathlib import Path

import numpy as np

N_CLASSES = 10
SIDE = 28
TEMPLATE_SEED = 13
TRAIN_SEED = 7
NOISE = 0.10
N_TRAIN = 8000
N_TEST = 260


def make_templates(rng: np.random.Generator) -> np.ndarray:
    """Smooth per-class intensity fields: 7x7 noise upsampled bilinearly."""
    coarse = rng.uniform(0.30, 0.70, size=(N_CLASSES, 7, 7))
    idx = np.linspace(0, 6, SIDE)
    lo = np.floor(idx).astype(int)
    hi = np.minimum(lo + 1, 6)
    frac = idx - lo
    rows = (1 - frac)[:, None] * coarse[:, lo, :] + frac[:, None] * coarse[:, hi, :]
    cols = (1 - frac)[None, :] * rows[:, :, lo] + frac[None, :] * rows[:, :, hi]
    return cols


def sample_batch(templates, labels, rng):
    x = templates[labels] + NOISE * rng.standard_normal((len(labels), SIDE, SIDE))
    return np.clip(x, 0.0, 1.0).astype(np.float32)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(Path(__file__).parent.parent / "tests/fixtures"))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    import torch
    import torch.nn as nn

    torch.manual_seed(TRAIN_SEED)
    rng = np.random.default_rng(TEMPLATE_SEED)
    templates = make_templates(rng)

    train_labels = rng.integers(0, N_CLASSES, size=N_TRAIN)
    train_x = sample_batch(templates, train_labels, rng)
    test_labels = rng.integers(0, N_CLASSES, size=N_TEST)
    test_x = sample_batch(templates, test_labels, rng)

    net = nn.Sequential(
        nn.Conv2d(1, 8, 3, padding=1),
        nn.ReLU(),
        nn.Conv2d(8, 16, 3, stride=2, padding=1),
        nn.ReLU(),
        nn.Flatten(),
        nn.Linear(16 * 14 * 14, N_CLASSES),
    )
    n_params = sum(p.numel() for p in net.parameters())
    assert n_params <= 100_000, n_params
    print(f"model parameters: {n_params}")

    opt = torch.optim.Adam(net.parameters(), lr=1e-3)
    loss_fn = nn.CrossEntropyLoss()
    xt = torch.from_numpy(train_x).unsqueeze(1)
    yt = torch.from_numpy(train_labels.astype(np.int64))
    for epoch in range(6):
        perm = torch.randperm(N_TRAIN)
        total = 0.0
        for i in range(0, N_TRAIN, 128):
            idx = perm[i : i + 128]
            opt.zero_grad()
            loss = loss_fn(net(xt[idx]), yt[idx])
            loss.backward()
            opt.step()
            total += float(loss) * len(idx)
        with torch.no_grad():
            acc = (net(torch.from_numpy(test_x).unsqueeze(1)).argmax(1).numpy()
                   == test_labels).mean()
        print(f"epoch {epoch}: loss {total / N_TRAIN:.4f} test acc {acc:.3f}")

    # export in the squarebox wire format
    from squarebox.dataset import Dataset, save_dataset
    from squarebox.inference import LayerSpec, Model, save_model
    from squarebox.tensors import ImageTensor

    layers = [
        LayerSpec("conv2d", out_channels=8, in_channels=1, kernel_h=3, kernel_w=3,
                  stride=1, padding=1),
        LayerSpec("relu"),
        LayerSpec("conv2d", out_channels=16, in_channels=8, kernel_h=3, kernel_w=3,
                  stride=2, padding=1),
        LayerSpec("relu"),
        LayerSpec("flatten"),
        LayerSpec("dense", out_dim=N_CLASSES, in_dim=16 * 14 * 14),
    ]
    params = [p.detach().numpy().astype(np.float64) for p in net.parameters()]
    weights = [
        (params[0], params[1]),
        None,
        (params[2], params[3]),
        None,
        None,
        (params[4], params[5]),
    ]
    model = Model(layers, weights, N_CLASSES, (1, SIDE, SIDE))
    save_model(model, out / "model.json")

    images = tuple(ImageTensor(img[None, :, :].astype(np.float64)) for img in test_x)
    targets = tuple(int((y + 1 + rng.integers(0, N_CLASSES - 1)) % N_CLASSES)
                    for y in test_labels)
    save_dataset(Dataset(images, tuple(int(v) for v in test_labels), targets),
                 out / "dataset.json")

    # verify the exported f32 engine copy
    from squarebox.inference import load_model

    engine = load_model(out / "model.json")
    correct = sum(engine.predict(img) == y for img, y in zip(images, test_labels))
    print(f"engine clean accuracy: {correct}/{N_TEST}")
    assert correct >= 210, "fixture model must leave >= 200 initially-correct points"


if __name__ == "__main__":
    main()
