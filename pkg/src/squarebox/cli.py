"""Command-line interface: `attack`, `analyze`, and `serve-stub` subcommands."""

from __future__ import annotations

import argparse
import json
import sys

from . import analysis, harness
from .attack import AttackConfig
from .dataset import load_dataset
from .inference import load_model
from .losses import AttackGoal
from .tensors import Norm, ThreatModel


def _add_attack_parser(sub):
    p = sub.add_parser("attack", help="run the batch attack harness")
    p.add_argument("--model", required=True, help="path to model.json")
    p.add_argument("--dataset", required=True, help="path to dataset.json")
    p.add_argument("--norm", choices=["linf", "l2"], default="linf")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--p-init", type=float, default=0.05)
    p.add_argument("--n-queries", type=int, default=10000)
    p.add_argument("--mode", choices=["untargeted", "targeted"], default="untargeted")
    p.add_argument("--variant", default="", help="update-shape variant (per-norm default)")
    p.add_argument("--init", default="", help="initialization variant (per-norm default)")
    p.add_argument("--loss", choices=["auto", "margin", "ce"], default="auto")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", required=True, help="JSONL output path")
    p.add_argument("--curve-output", default="", help="CSV path (default: OUTPUT.curve.csv)")
    p.add_argument("--literal-init-loss", action="store_true",
                   help="take the reference loss at the clean point, as written")
    p.add_argument("--skip-null-updates", action="store_true",
                   help="do not spend a query when a projected update changes nothing")
    return p


def _cmd_attack(args) -> int:
    model = load_model(args.model)
    ds = load_dataset(args.dataset)
    if args.mode == "targeted" and ds.targets is None:
        print("error: targeted mode requires a dataset with targets", file=sys.stderr)
        return 2
    # The per-image goal label comes from the dataset; the placeholder here is
    # replaced inside the harness.
    goal = AttackGoal(args.mode == "targeted", 0)
    config = AttackConfig(
        tm=ThreatModel(Norm.parse(args.norm), args.eps),
        n_queries=args.n_queries,
        goal=goal,
        seed=args.seed,
        p_init=args.p_init,
        update=args.variant,
        init=args.init,
        loss=args.loss,
        literal_init_loss=args.literal_init_loss,
        skip_null_updates=args.skip_null_updates,
    )
    records, stats = harness.run_batch(
        model, ds, config, restarts=args.restarts, jobs=args.jobs
    )
    harness.write_jsonl(records, stats, args.output)
    curve_path = args.curve_output or (args.output + ".curve.csv")
    harness.write_curve_csv(stats, curve_path)
    if stats.n_initially_correct == 0:
        print("warning: no eligible points; query statistics undefined", file=sys.stderr)
    print(
        f"points={stats.n_points} eligible={stats.n_initially_correct} "
        f"success={stats.n_success} failure_rate={stats.failure_rate} "
        f"avg_queries={stats.avg_queries} median_queries={stats.median_queries}"
    )
    return 0


def _cmd_analyze(args) -> int:
    report = analysis.run_analysis(seed=args.seed, trials=args.trials,
                                   conv_seeds=args.conv_seeds)
    text = json.dumps(report, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    print(text)
    for check in report["checks"]:
        print(f"{'PASS' if check['passed'] else 'FAIL'} {check['name']}", file=sys.stderr)
    return 0 if report["passed"] else 1


def _cmd_serve_stub(args) -> int:
    from .remote import serve_stub

    model = load_model(args.model) if args.model else None
    fixed = [float(v) for v in args.logits.split(",")] if args.logits else None
    if model is None and fixed is None:
        print("error: serve-stub needs --model or --logits", file=sys.stderr)
        return 2
    serve_stub(args.host, args.port, model=model, fixed_logits=fixed)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squarebox")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_attack_parser(sub)

    p = sub.add_parser("analyze", help="run the theory checks and report pass/fail")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--conv-seeds", type=int, default=5)
    p.add_argument("--output", default="", help="also write the JSON report here")

    p = sub.add_parser("serve-stub", help="serve a model (or fixed logits) over HTTP")
    p.add_argument("--model", default="", help="path to model.json")
    p.add_argument("--logits", default="", help="comma-separated fixed logits")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "attack":
        return _cmd_attack(args)
    if args.command == "analyze":
        return _cmd_analyze(args)
    return _cmd_serve_stub(args)


if __name__ == "__main__":
    sys.exit(main())
