"""Command-line entry point: ``neurofuzzy <command> [flags]``.

Data goes to the files named by ``--out*`` flags (reports go to stdout when
no report path is given); diagnostics go to stderr. Exit status is 0 on
success, 1 on a runtime/data error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import metrics
from .data import MgSeries, embed, load_csv, mackey_glass, read_columns, save_csv, split, split_ordered
from .errors import ConfigurationError, NeuroFuzzyError
from .membership import Family
from .model import AnfisModel, Order, load_model, predict_batch, save_model
from .training import Fixed, JangAdaptive, StepDecay, StopReason, TrainConfig, fit

log = logging.getLogger("neurofuzzy")

WORKERS_ENV = "NEUROFUZZY_WORKERS"


class UsageError(ConfigurationError):
    pass


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _patience(text: str):
    if text.lower() in ("none", "off", "-1"):
        return None
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("patience must be >= 0 or 'none'")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# shared pieces


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, type=Path, help="CSV file with a header row")
    p.add_argument("--inputs", required=True, type=_csv_list, help="comma-separated input columns")
    p.add_argument("--target", required=True, help="target column")
    p.add_argument("--split", type=float, default=0.8, help="training fraction after shuffling")
    p.add_argument("--limit", type=_positive_int, help="use only the first N rows of the file")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.add_argument("--n-train", type=_positive_int, help="ordered split: first N rows train")
    p.add_argument("--n-check", type=_positive_int, help="ordered split: next M rows check")


def _add_model_flags(p: argparse.ArgumentParser, epochs: int = 1000) -> None:
    p.add_argument("--mf-family", default="gaussmf", choices=[f.value for f in Family])
    p.add_argument("--mfs-per-input", type=_positive_int, default=3)
    p.add_argument("--order", type=int, choices=(0, 1), default=1)
    p.add_argument("--eta", type=float, default=0.002, help="initial learning rate")
    p.add_argument("--eta-policy", choices=("fixed", "step", "jang"), default="fixed")
    p.add_argument("--step-factor", type=float, default=0.2, help="step policy multiplier")
    p.add_argument("--step-every", type=_positive_int, default=5, help="step policy period")
    p.add_argument("--up-factor", type=float, default=1.1)
    p.add_argument("--down-factor", type=float, default=0.9)
    p.add_argument("--epochs", type=_positive_int, default=epochs)
    p.add_argument("--error-goal", type=float, default=1e-5)
    p.add_argument("--check-every", type=_positive_int, default=10)
    p.add_argument("--patience", type=_patience, default=5, help="integer, or 'none' to disable")


def _load_split(args):
    ds = load_csv(args.data, args.inputs, args.target)
    if args.limit:
        ds = ds.head(args.limit)
    if args.n_train or args.n_check:
        if not (args.n_train and args.n_check):
            raise UsageError("--n-train and --n-check must be given together")
        return split_ordered(ds, args.n_train, args.n_check)
    return split(ds, args.split, args.seed)


def _policy(args):
    if args.eta_policy == "step":
        return StepDecay(args.step_factor, args.step_every)
    if args.eta_policy == "jang":
        return JangAdaptive(args.up_factor, args.down_factor)
    return Fixed()


def _config(args, **overrides) -> TrainConfig:
    kw = dict(
        eta0=args.eta,
        eta_policy=_policy(args),
        max_epochs=args.epochs,
        error_goal=args.error_goal,
        check_every=args.check_every,
        patience=args.patience,
        seed=args.seed,
    )
    kw.update(overrides)
    return TrainConfig(**kw)


def _initial_model(train, args, family=None, order=None) -> AnfisModel:
    return AnfisModel.from_data(
        train.X, train.input_names, args.mfs_per_input,
        family or args.mf_family, Order(args.order if order is None else order),
    )


def _report(model, train, check, trace, config) -> dict:
    p_train = predict_batch(model, train.X)
    p_check = predict_batch(model, check.X)
    combined_obs = np.concatenate([train.y, check.y])
    combined_pred = np.concatenate([p_train, p_check])
    return {
        "n_train": len(train),
        "n_check": len(check),
        "train": metrics.evaluate(train.y, p_train).to_dict(),
        "check": metrics.evaluate(check.y, p_check).to_dict(),
        "combined": metrics.evaluate(combined_obs, combined_pred).to_dict(),
        "epochs_run": trace.epochs,
        "best_epoch": trace.best_epoch,
        "stopped_reason": trace.stopped_reason.value,
        "mean_epoch_seconds": trace.mean_epoch_seconds,
        "config": {
            "eta0": config.eta0,
            "eta_policy": type(config.eta_policy).__name__,
            "max_epochs": config.max_epochs,
            "error_goal": config.error_goal,
            "check_every": config.check_every,
            "patience": config.patience,
            "seed": config.seed,
        },
    }


def _emit_json(doc: dict, path) -> None:
    text = json.dumps(doc, indent=2, allow_nan=True) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_gen_mg(args) -> None:
    series = mackey_glass(args.tau, args.horizon, args.step, args.x0)
    series.to_csv(args.out)


def cmd_embed(args) -> None:
    series = MgSeries.from_csv(args.series)
    lags = [int(v) for v in _csv_list(args.lags)]
    save_csv(embed(series, lags, args.ahead), args.out)


def cmd_train(args) -> None:
    train, check = _load_split(args)
    config = _config(args)
    best, trace = fit(_initial_model(train, args), train, check, config)
    if args.out_model:
        save_model(best, args.out_model)
    if args.out_trace:
        trace.to_csv(args.out_trace)
    if args.out_parity:
        obs = np.concatenate([train.y, check.y])
        metrics.parity_export(obs, predict_batch(best, np.vstack([train.X, check.X])), args.out_parity)
    _emit_json(_report(best, train, check, trace, config), args.out_report)


def cmd_overfit_trace(args) -> None:
    train, check = _load_split(args)
    config = _config(args, patience=None)
    best, trace = fit(_initial_model(train, args), train, check, config)
    if args.out_trace:
        trace.to_csv(args.out_trace)
    report = _report(best, train, check, trace, config)
    col = trace.check_rmse
    report["argmin_check_epoch"] = int(np.nanargmin(col)) + 1 if np.any(np.isfinite(col)) else None
    report["final_epoch"] = trace.epochs
    _emit_json(report, args.out_report)


def cmd_predict(args) -> None:
    model = load_model(args.model)
    columns = args.inputs or [v.name for v in model.inputs]
    X = read_columns(args.data, columns)
    pred = predict_batch(model, X)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "prediction"])
        for i, v in enumerate(pred.tolist()):
            writer.writerow([i, repr(v)])


def cmd_evaluate(args) -> None:
    model = load_model(args.model)
    columns = args.inputs or [v.name for v in model.inputs]
    ds = load_csv(args.data, columns, args.target)
    pred = predict_batch(model, ds.X)
    if args.out_parity:
        metrics.parity_export(ds.y, pred, args.out_parity)
    _emit_json(metrics.evaluate(ds.y, pred).to_dict(), args.out_report)


def _run_cells(cells, fn):
    workers = _workers()
    if workers == 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def cmd_compare_mfs(args) -> None:
    train, check = _load_split(args)
    families = [Family.parse(f) for f in (args.families or [f.value for f in Family])]
    orders = [int(o) for o in _csv_list(args.orders)]
    config = _config(args, patience=None)

    def run(cell):
        family, order = cell
        model = _initial_model(train, args, family, order)
        _, trace = fit(model, train, check, config)
        if trace.stopped_reason is StopReason.DIVERGED:
            log.warning("%s order %d diverged at epoch %d", family.value, order, trace.epochs)
            return family.value, order, "diverged"
        return family.value, order, repr(float(trace.train_rmse[-1]) * math.sqrt(2.0))

    rows = _run_cells([(f, o) for f in families for o in orders], run)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "order", "train_rmse_std"])
        writer.writerows(sorted(rows, key=lambda r: ([f.value for f in Family].index(r[0]), r[1])))


def parse_eta_spec(text: str):
    """``0.002`` (fixed), ``jang:0.002[:up:down]`` or ``step:0.05[:factor:every]``."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            eta = float(parts[0])
            return f"{eta:g}", eta, Fixed()
        kind, eta = parts[0].lower(), float(parts[1])
        if kind == "jang":
            up = float(parts[2]) if len(parts) > 2 else 1.1
            down = float(parts[3]) if len(parts) > 3 else 0.9
            return f"jang@{eta:g}", eta, JangAdaptive(up, down)
        if kind == "step":
            factor = float(parts[2]) if len(parts) > 2 else 0.2
            every = int(parts[3]) if len(parts) > 3 else 5
            return f"step@{eta:g}x{factor:g}/{every}", eta, StepDecay(factor, every)
    except (ValueError, IndexError):
        pass
    raise UsageError(f"bad learning-rate spec {text!r}")


def cmd_lr_sweep(args) -> None:
    specs = [parse_eta_spec(s) for s in _csv_list(args.etas)]
    if not specs:
        raise UsageError("--etas needs at least one learning rate")
    train, check = _load_split(args)

    def run(spec):
        label, eta, policy = spec
        config = _config(args, eta0=eta, eta_policy=policy, patience=None)
        _, trace = fit(_initial_model(train, args), train, check, config)
        if trace.stopped_reason is StopReason.DIVERGED:
            label += "+diverged"
        return label, trace

    results = _run_cells(specs, run)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eta_label", "epoch", "train_rmse"])
        for label, trace in results:
            for r in trace.records:
                if math.isfinite(r.train_rmse):
                    writer.writerow([label, r.epoch, repr(r.train_rmse)])
    if args.out_summary:
        with open(args.out_summary, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["eta_label", "best_epoch", "best_train_rmse", "stopped_reason"])
            for label, trace in results:
                curve = trace.train_rmse
                finite = np.where(np.isfinite(curve), curve, np.inf)
                i = int(np.argmin(finite))
                writer.writerow([label, i + 1, repr(float(curve[i])), trace.stopped_reason.value])


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neurofuzzy", description="ANFIS hybrid training toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-mg", help="integrate the Mackey-Glass equation, write t,x CSV")
    p.add_argument("--tau", type=float, default=17.0)
    p.add_argument("--horizon", type=float, default=2000.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--x0", type=float, default=1.2)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_gen_mg)

    p = sub.add_parser("embed", help="lag-embed a t,x series into a dataset CSV")
    p.add_argument("--series", required=True, type=Path)
    p.add_argument("--lags", default="-12,-6,0")
    p.add_argument("--ahead", type=int, default=6)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="hybrid training with early stopping")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--out-model", type=Path)
    p.add_argument("--out-trace", type=Path)
    p.add_argument("--out-report", type=Path)
    p.add_argument("--out-parity", type=Path)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("overfit-trace", help="long run without early stopping; report check minimum")
    _add_data_flags(p)
    _add_model_flags(p)
    p.set_defaults(check_every=1)
    p.add_argument("--out-trace", type=Path, required=True)
    p.add_argument("--out-report", type=Path)
    p.set_defaults(func=cmd_overfit_trace)

    p = sub.add_parser("predict", help="apply a saved model to an input CSV")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--inputs", type=_csv_list, help="defaults to the model's input names")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a saved model on a labelled CSV")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--inputs", type=_csv_list)
    p.add_argument("--target", required=True)
    p.add_argument("--out-report", type=Path)
    p.add_argument("--out-parity", type=Path)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare-mfs", help="train every family x order under one budget")
    _add_data_flags(p)
    _add_model_flags(p, epochs=300)
    p.add_argument("--families", type=_csv_list)
    p.add_argument("--orders", default="0,1")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_compare_mfs)

    p = sub.add_parser("lr-sweep", help="train once per learning rate or policy")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--etas", required=True, help="e.g. 0.001,0.002,jang:0.002,step:0.05:0.2:5")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--out-summary", type=Path)
    p.set_defaults(func=cmd_lr_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"neurofuzzy {args.command}: {exc}", file=sys.stderr)
        return 2
    except (NeuroFuzzyError, OSError) as exc:
        print(f"neurofuzzy {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
