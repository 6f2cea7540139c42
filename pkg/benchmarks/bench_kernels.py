#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the raw conv2d/dense kernels on the fixture-model shapes, then runs a
short end-to-end attack under each backend (the backend is chosen at import,
so the attack arm re-executes this script in a subprocess with
SQUAREBOX_PURE_KERNELS set).

Usage: python3 benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

REPEATS = 200
FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"


def bench_kernels(mod):
    rng = np.random.default_rng(0)
    x1 = rng.random((1, 28, 28))
    w1 = rng.normal(size=(8, 1, 3, 3))
    b1 = rng.normal(size=8)
    x2 = rng.random((8, 28, 28))
    w2 = rng.normal(size=(16, 8, 3, 3))
    b2 = rng.normal(size=16)
    xd = rng.random(16 * 14 * 14)
    wd = rng.normal(size=(10, 16 * 14 * 14))
    bd = rng.normal(size=10)

    out = {}
    for name, fn in [
        ("conv 1->8 28x28", lambda: mod.conv2d_forward(x1, w1, b1, 1, 1)),
        ("conv 8->16 s2", lambda: mod.conv2d_forward(x2, w2, b2, 2, 1)),
        ("dense 3136->10", lambda: mod.dense_forward(xd, wd, bd)),
    ]:
        fn()  # warm up
        t0 = time.perf_counter()
        for _ in range(REPEATS):
            fn()
        out[name] = (time.perf_counter() - t0) / REPEATS * 1e6  # us
    return out


def bench_attack():
    from squarebox import kernels
    from squarebox.attack import AttackConfig, run_attack
    from squarebox.classifiers import CountingClassifier
    from squarebox.dataset import load_dataset
    from squarebox.inference import load_model
    from squarebox.losses import untargeted_goal
    from squarebox.tensors import Norm, ThreatModel

    model = load_model(FIXTURES / "model.json")
    ds = load_dataset(FIXTURES / "dataset.json")
    clf = CountingClassifier(model)
    t0 = time.perf_counter()
    for i in range(10):
        cfg = AttackConfig(
            tm=ThreatModel(Norm.LINF, 0.1), n_queries=2000,
            goal=untargeted_goal(int(ds.labels[i])), seed=i, p_init=0.3,
        )
        run_attack(clf, cfg, ds.images[i])
    elapsed = time.perf_counter() - t0
    return {
        "backend": kernels.BACKEND,
        "queries": clf.query_count,
        "us_per_query": elapsed / clf.query_count * 1e6,
    }


def main():
    if "--attack-only" in sys.argv:
        print(json.dumps(bench_attack()))
        return

    from squarebox.kernels import _pure

    try:
        from squarebox.kernels import _fast
    except ImportError:
        _fast = None

    arms = [("pure", _pure)] + ([("cython", _fast)] if _fast else [])
    results = {name: bench_kernels(mod) for name, mod in arms}
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name, _ in arms) + "   speedup")
    for key in next(iter(results.values())):
        row = [results[name][key] for name, _ in arms]
        speed = f"{row[0] / row[-1]:.1f}x" if len(row) > 1 else "-"
        print(f"{key:<18}" + "".join(f"{v:>10.1f}us" for v in row) + f"   {speed}")

    print()
    for force_pure in ("1", "0") if _fast else ("1",):
        env = dict(os.environ, SQUAREBOX_PURE_KERNELS=force_pure)
        proc = subprocess.run(
            [sys.executable, __file__, "--attack-only"],
            capture_output=True, text=True, env=env, check=True,
        )
        stats = json.loads(proc.stdout)
        print(
            f"attack end-to-end [{stats['backend']:>6}]: "
            f"{stats['us_per_query']:.0f} us/query over {stats['queries']} queries"
        )


if __name__ == "__main__":
    main()
