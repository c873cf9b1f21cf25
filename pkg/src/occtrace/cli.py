"""Command-line front end.

Subcommands cover the whole pipeline: ``synth`` writes a deterministic
synthetic dataset, ``train`` fits a model from normal traces, ``sweep``
scans rejection rates against a labeled validation set, ``evaluate`` scores
a labeled dataset, and ``detect`` streams per-window verdicts for unlabeled
input. Exit codes: 0 success, 1 operational error, 2 usage error.

Structured results go to stdout as JSON (or CSV rows where noted); progress
and timing go to stderr so equal-seed runs produce byte-identical stdout.
"""

import argparse
import dataclasses
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .eigen import fit_eigenmodel
from .errors import DatasetError, PipelineError, SingleClassError
from .metrics import build_confusion, compute_metrics, roc_auc
from .model_io import DetectorModel, load_model, save_model
from .occ import DEFAULT_TRR_GRID, OccConfig, calibrate_threshold, sweep_trr, train_occ
from .traces import (
    Label,
    Role,
    SynthConfig,
    generate_synthetic_dataset,
    load_dataset,
    parse_trace_file,
    save_dataset_flat,
)
from .windows import WindowConfig, window_dataset, window_trace, write_windows_csv


def _log(message):
    print(message, file=sys.stderr)


def _emit(doc):
    sys.stdout.write(json.dumps(doc, indent=2, allow_nan=False) + "\n")


def _load_occ_config(path, seed_override=None):
    try:
        mapping = json.loads(Path(path).read_text())
    except OSError as exc:
        raise PipelineError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PipelineError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(mapping, dict):
        raise PipelineError(f"config file {path} must hold a JSON object")
    try:
        cfg = OccConfig.from_mapping(mapping)
    except (TypeError, ValueError) as exc:
        raise PipelineError(f"bad config {path}: {exc}") from exc
    if seed_override is not None:
        cfg = dataclasses.replace(cfg, seed=seed_override)
    return cfg


def _window_config(args):
    try:
        return WindowConfig(
            size=args.window_size,
            shift=args.shift,
            pad=args.pad,
            drop_incomplete=args.drop_incomplete,
        )
    except ValueError as exc:
        raise PipelineError(str(exc)) from exc


def _dataset_summary(dataset, matrix):
    return {
        "traces": {
            "normal": dataset.count(Label.NORMAL),
            "attack": dataset.count(Label.ATTACK),
        },
        "windows": {
            "normal": matrix.count(Label.NORMAL),
            "attack": matrix.count(Label.ATTACK),
        },
    }


def _add_window_flags(parser):
    parser.add_argument("--window-size", type=int, default=76, help="frame length")
    parser.add_argument("--shift", type=int, default=10, help="slide distance between frames")
    parser.add_argument("--pad", type=float, default=0.1, help="fill value for the final frame")
    parser.add_argument("--drop-incomplete", action="store_true",
                        help="discard a final frame that needed padding")


def _train_model(args):
    cfg = _load_occ_config(args.config, seed_override=args.seed)
    wc = _window_config(args)
    dataset = load_dataset(args.data, args.layout, Role.TRAINING)
    matrix = window_dataset(dataset, wc)
    if args.dump_windows:
        with open(args.dump_windows, "w") as handle:
            write_windows_csv(matrix, handle)
    eigen = fit_eigenmodel(
        matrix, n_components=args.components,
        center_before_project=args.center_before_project,
    )
    features = eigen.project_rows(matrix.rows())
    occ = train_occ(features, cfg)
    if args.absolute_threshold is not None:
        # alternate thresholding: reject when the target density itself falls
        # at or below a fixed cutoff instead of the calibrated order statistic
        if args.absolute_threshold <= 0:
            raise PipelineError("--absolute-threshold must be positive")
        occ = occ.with_threshold(math.log(args.absolute_threshold))
    meta = {"tool": f"occtrace {__version__}", "layout": args.layout, "seed": cfg.seed}
    model = DetectorModel(window_config=wc, eigen=eigen, occ=occ, meta=meta)
    return model, dataset, matrix, cfg


def cmd_train(args):
    started = time.perf_counter()
    model, dataset, matrix, cfg = _train_model(args)
    save_model(model, args.out)
    _log(f"trained on {matrix.n_windows} windows in {time.perf_counter() - started:.2f}s")
    _emit({
        "report": "training",
        "model_path": str(args.out),
        "dataset": _dataset_summary(dataset, matrix),
        "window": {"size": model.window_config.size, "shift": model.window_config.shift,
                   "pad": model.window_config.pad},
        "eigen": {"dim": model.eigen.dim, "n_components": model.eigen.n_components},
        "occ": {
            "estimator": cfg.estimator,
            "prior_target": model.occ.prior_target,
            "log_threshold": model.occ.log_threshold
            if model.occ.log_threshold != float("-inf") else "-inf",
        },
        "training_report": model.occ.report.to_dict(include_scores=False),
        "config": cfg.to_mapping(),
    })
    return 0


def cmd_evaluate(args):
    started = time.perf_counter()
    model = load_model(args.model)
    wc = model.window_config
    if args.window_size is not None and args.window_size != wc.size:
        raise PipelineError(
            f"window size mismatch: model uses {wc.size}, flag requested {args.window_size}"
        )
    dataset = load_dataset(args.data, args.layout, Role.TESTING)
    matrix = window_dataset(dataset, wc)
    scores, verdicts = model.score_windows(matrix.rows())
    cm = build_confusion(matrix.labels, verdicts)
    try:
        auc = roc_auc(scores, matrix.labels)
    except SingleClassError:
        auc = None
    metrics = compute_metrics(cm, auc=auc)
    _log(f"evaluated {matrix.n_windows} windows in {time.perf_counter() - started:.2f}s")
    if args.csv:
        sys.stdout.write("trace_id,start,truth,verdict,log_score\n")
        for (trace_id, start), truth, verdict, score in zip(
            matrix.origins, matrix.labels, verdicts, scores
        ):
            sys.stdout.write(
                f"{trace_id},{start},{Label(int(truth)).name.lower()},"
                f"{Label(int(verdict)).name.lower()},{float(score)!r}\n"
            )
        return 0
    _emit({
        "report": "evaluation",
        "model_path": str(args.model),
        "dataset": _dataset_summary(dataset, matrix),
        "confusion": cm.to_dict(),
        "metrics": metrics.to_dict(),
        "verdicts": {
            "normal": int(np.sum(verdicts == int(Label.NORMAL))),
            "anomaly": int(np.sum(verdicts == int(Label.ATTACK))),
        },
        "config": model.occ.config.to_mapping(),
    })
    return 0


def _detect_inputs(path):
    p = Path(path)
    if p.is_dir():
        files = sorted(f for f in p.iterdir() if f.is_file())
        if not files:
            raise DatasetError(f"no input files under {p}")
        return files
    if p.is_file():
        return [p]
    raise DatasetError(f"input path {p} does not exist")


def cmd_detect(args):
    model = load_model(args.model)
    wc = model.window_config
    sys.stdout.write("trace_id,start,log_score,verdict\n")
    per_trace = []
    for path in _detect_inputs(args.input):
        trace = parse_trace_file(path.read_bytes(), trace_id=path.name)
        rows, starts = window_trace(trace, wc)
        if rows.shape[0] == 0:
            continue
        scores, verdicts = model.score_windows(rows)
        for start, score, verdict in zip(starts, scores, verdicts):
            name = "anomaly" if verdict == int(Label.ATTACK) else "normal"
            sys.stdout.write(f"{trace.id},{int(start)},{float(score)!r},{name}\n")
        fraction = float(np.mean(verdicts == int(Label.ATTACK)))
        per_trace.append((trace.id, fraction))
    if args.aggregate is not None:
        sys.stdout.write("trace_id,anomalous_fraction,verdict\n")
        for trace_id, fraction in per_trace:
            verdict = "anomaly" if fraction > args.aggregate else "normal"
            sys.stdout.write(f"{trace_id},{float(fraction)!r},{verdict}\n")
    return 0


def cmd_sweep(args):
    cfg = _load_occ_config(args.config, seed_override=args.seed)
    wc = _window_config(args)
    dataset = load_dataset(args.data, args.layout, Role.TRAINING)
    matrix = window_dataset(dataset, wc)
    eigen = fit_eigenmodel(matrix)
    occ = train_occ(eigen.project_rows(matrix.rows()), cfg)

    validation = load_dataset(args.validation, args.layout, Role.TESTING)
    val_matrix = window_dataset(validation, wc)
    val_features = eigen.project_rows(val_matrix.rows())

    heldout = np.asarray(occ.report.heldout_scores, dtype=np.float64)

    def build(trr):
        # re-calibrate the already trained model at each grid point
        return occ.with_threshold(calibrate_threshold(heldout, trr))

    grid = DEFAULT_TRR_GRID if args.grid is None else tuple(
        float(v) for v in args.grid.split(",") if v.strip()
    )
    best, curve = sweep_trr(build, val_features, val_matrix.labels, grid=grid)
    _emit({
        "report": "sweep",
        "best_target_rejection_rate": best,
        "curve": [{"target_rejection_rate": trr, "auc": auc} for trr, auc in curve],
        "config": cfg.to_mapping(),
    })
    return 0


def cmd_synth(args):
    cfg = SynthConfig(
        alphabet_size=args.alphabet_size,
        normal_transition_seed=args.seed,
        attack_transition_seed=args.seed + 1,
        n_normal=args.n_normal,
        n_attack=args.n_attack,
        n_normal_test=args.n_normal_test,
        min_len=args.min_len,
        max_len=args.max_len,
    )
    training, testing = generate_synthetic_dataset(cfg)
    out = Path(args.out)
    save_dataset_flat(training, out / "train")
    save_dataset_flat(testing, out / "test")
    _emit({
        "report": "synth",
        "out": str(out),
        "train": {"normal": training.count(Label.NORMAL)},
        "test": {
            "normal": testing.count(Label.NORMAL),
            "attack": testing.count(Label.ATTACK),
        },
        "seed": args.seed,
    })
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="occ",
        description="Host-based anomaly detection over system-call traces.",
    )
    parser.add_argument("--version", action="version", version=f"occtrace {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a detector from normal traces")
    p_train.add_argument("--config", required=True, help="JSON classifier config")
    p_train.add_argument("--data", required=True, help="training dataset root")
    p_train.add_argument("--layout", choices=("adfa", "flat"), default="flat")
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_train.add_argument("--components", type=int, default=None,
                         help="eigenvectors to keep (default: all)")
    p_train.add_argument("--center-before-project", action="store_true",
                         help="subtract the mean before projecting")
    p_train.add_argument("--absolute-threshold", type=float, default=None, metavar="P",
                         help="use a fixed target-density cutoff instead of the "
                              "calibrated rejection-rate threshold")
    p_train.add_argument("--dump-windows", default=None,
                         help="debug CSV of the window matrix, one window per line")
    _add_window_flags(p_train)
    p_train.set_defaults(handler=cmd_train)

    p_sweep = sub.add_parser("sweep", help="scan rejection rates on a validation set")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--data", required=True, help="training dataset root")
    p_sweep.add_argument("--validation", required=True, help="labeled validation root")
    p_sweep.add_argument("--layout", choices=("adfa", "flat"), default="flat")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--grid", default=None,
                         help="comma-separated rejection rates (default 0.001..0.4)")
    _add_window_flags(p_sweep)
    p_sweep.set_defaults(handler=cmd_sweep)

    p_eval = sub.add_parser("evaluate", help="score a labeled dataset against a model")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--layout", choices=("adfa", "flat"), default="flat")
    p_eval.add_argument("--csv", action="store_true", help="per-window CSV instead of JSON")
    p_eval.add_argument("--window-size", type=int, default=None,
                        help="must match the model if given")
    p_eval.set_defaults(handler=cmd_evaluate)

    p_detect = sub.add_parser("detect", help="score unlabeled traces")
    p_detect.add_argument("--model", required=True)
    p_detect.add_argument("--input", required=True, help="trace file or directory")
    p_detect.add_argument("--aggregate", type=float, default=None, metavar="THETA",
                          help="also flag traces whose anomalous-window fraction exceeds THETA")
    p_detect.set_defaults(handler=cmd_detect)

    p_synth = sub.add_parser("synth", help="write a deterministic synthetic dataset")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--seed", type=int, default=7)
    p_synth.add_argument("--alphabet-size", type=int, default=64)
    p_synth.add_argument("--n-normal", type=int, default=200)
    p_synth.add_argument("--n-attack", type=int, default=100)
    p_synth.add_argument("--n-normal-test", type=int, default=None)
    p_synth.add_argument("--min-len", type=int, default=100)
    p_synth.add_argument("--max-len", type=int, default=240)
    p_synth.set_defaults(handler=cmd_synth)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (PipelineError, OSError, ValueError) as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
