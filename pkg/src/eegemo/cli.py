"""Command-line entry point wiring the full pipeline.

Subcommands: synth, validate, psd, features, grid, stats. Every output
is deterministic given the resolved configuration (which each report
embeds), and all figures are rendered straight to files.

Grid configuration is layered: built-in defaults, then a key=value
config file (--config), then command-line flags. The EEGEMO_OUT
environment variable supplies the default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import TrainConfig
from .evaluate import BAND_ORDER, run_grid
from .featurize import (LABEL_SCHEMES, REGION_CHANNELS, REGION_ORDER, build_features,
                        labels_for_scheme, rating_stats)
from .ingest import (Dataset, FormatError, SynthSpec, load_dataset, synth_dataset,
                     trim_baseline, write_dataset)
from .report import (compare_to_published, load_published, psd_to_csv,
                     render_psd_figure, render_ratings_figure, write_grid_reports)
from .spectral import WelchParams, band_by_name, welch_psd

GRID_DEFAULTS = {
    "dataset": None,
    "format": "auto",
    "segment_len": 256,
    "overlap": 128,
    "bands": ",".join(BAND_ORDER),
    "regions": ",".join(REGION_ORDER),
    "classifiers": "knn,svm,mlp",
    "scheme": "arousal-binary",
    "seed": 0,
    "folds": 10,
    "out_dir": None,  # resolved against EEGEMO_OUT
    "trim_baseline": 0,
    "standardize": True,
    "stratified": True,
    "figures": True,
    "knn_k": 5,
    "svm_c": 1.0,
    "svm_kernel": "rbf",
    "svm_gamma": None,
    "svm_tol": 1e-3,
    "svm_max_passes": 10,
    "mlp_hidden": 64,
    "mlp_epochs": 200,
    "mlp_batch": 32,
    "mlp_lr": 1e-3,
}

_BOOL_KEYS = {"standardize", "stratified", "figures"}
_INT_KEYS = {"segment_len", "overlap", "seed", "folds", "trim_baseline",
             "knn_k", "svm_max_passes", "mlp_hidden", "mlp_epochs", "mlp_batch"}
_FLOAT_KEYS = {"svm_c", "svm_tol", "mlp_lr"}


def _parse_config_value(key: str, raw: str):
    raw = raw.strip()
    if key in _BOOL_KEYS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"config key {key}: expected a boolean, got {raw!r}")
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key == "svm_gamma":
        return None if raw.lower() in ("", "none", "auto") else float(raw)
    return raw


def read_config_file(path) -> dict:
    """key=value lines; # starts a comment; keys must be known."""
    values = {}
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in GRID_DEFAULTS:
            raise ValueError(f"{path}:{ln}: invalid config key {key!r}")
        values[key] = _parse_config_value(key, raw)
    return values


def _sniff_format(path: Path, declared: str) -> str:
    if declared != "auto":
        return declared
    try:
        with open(path, "rb") as fh:
            if fh.read(4) == b"EEGB":
                return "eegb"
    except OSError:
        pass
    return "csv" if path.suffix.lower() == ".csv" else "eegb"


def _load(path, fmt: str, trim: int = 0) -> Dataset:
    ds = load_dataset(path, _sniff_format(Path(path), fmt))
    if trim:
        ds = trim_baseline(ds, trim)
    return ds


def _resolve_channel(ds: Dataset, spec: str) -> int:
    if spec.isdigit():
        idx = int(spec)
        if not 0 <= idx < ds.n_channels:
            raise ValueError(f"channel index {idx} outside 0..{ds.n_channels - 1}")
        return idx
    return ds.channels.index(spec)


def _split_list(raw: str) -> list[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def _resolve_feature_channels(ds: Dataset, raw: str) -> list[str]:
    if raw == "all":
        return list(ds.channels.names)
    if raw in REGION_CHANNELS:
        return list(REGION_CHANNELS[raw])
    return _split_list(raw)


def cmd_synth(args) -> int:
    spec = SynthSpec(
        n_trials=args.trials,
        seed=args.seed,
        noise_std=args.noise_std,
        class_proportions=tuple(float(p) for p in _split_list(args.proportions)),
    )
    ds = synth_dataset(spec)
    write_dataset(ds, args.out, args.format)
    print(f"wrote {args.out}: {ds.n_trials} trials x {ds.n_channels} channels "
          f"x {ds.n_samples} samples, seed={args.seed}")
    return 0


def cmd_validate(args) -> int:
    ds = _load(args.path, args.format)
    ratings_ok = all(0 <= r.valence <= 9 and 0 <= r.arousal <= 9 for r in ds.ratings)
    print(f"{args.path}: OK")
    print(f"  trials:      {ds.n_trials}")
    print(f"  channels:    {ds.n_channels} ({ds.channels.names[0]}..{ds.channels.names[-1]})")
    print(f"  samples:     {ds.n_samples} per trial/channel")
    print(f"  sample rate: {ds.sample_rate_hz} Hz")
    print(f"  deap-shaped: {'yes' if ds.is_deap_shaped() else 'no'}")
    print(f"  ratings:     {len(ds.ratings)} records, in range: {'yes' if ratings_ok else 'no'}")
    print(f"  provenance:  {ds.provenance or '(none)'}")
    return 0


def cmd_psd(args) -> int:
    ds = _load(args.path, args.format, args.trim_baseline)
    ch = _resolve_channel(ds, args.channel)
    if not 0 <= args.trial < ds.n_trials:
        raise ValueError(f"trial {args.trial} outside 0..{ds.n_trials - 1}")
    params = WelchParams(segment_len=args.segment_len, overlap=args.overlap,
                         sample_rate_hz=ds.sample_rate_hz)
    psd = welch_psd(ds.samples[args.trial, ch], params)
    Path(args.out).write_text(psd_to_csv(psd), encoding="utf-8")
    print(f"wrote {args.out}: {len(psd.freqs)} bins, "
          f"{psd.n_segments_averaged} segments averaged")
    if args.plot:
        label = f"trial {args.trial}, {ds.channels.names[ch]}"
        print(f"wrote {render_psd_figure(psd, args.plot, label)}")
    return 0


def cmd_features(args) -> int:
    ds = _load(args.path, args.format, args.trim_baseline)
    channels = _resolve_feature_channels(ds, args.channels)
    bands = [band_by_name(b) for b in _split_list(args.bands)]
    params = WelchParams(segment_len=args.segment_len, overlap=args.overlap,
                         sample_rate_hz=ds.sample_rate_hz)
    features = build_features(ds, channels, bands, params)
    labels = labels_for_scheme(ds.ratings, args.scheme)
    lines = ["trial," + ",".join(features.column_names()) + ",label"]
    for t in range(features.n_trials):
        row = ",".join(repr(float(v)) for v in features.values[t])
        lines.append(f"{t},{row},{labels.labels[t]}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {args.out}: {features.n_trials} trials x {features.n_features} features, "
          f"scheme={args.scheme}")
    return 0


def cmd_grid(args) -> int:
    config = dict(GRID_DEFAULTS)
    if args.config:
        config.update(read_config_file(args.config))
    for key in GRID_DEFAULTS:
        override = getattr(args, key, None)
        if override is not None:
            config[key] = override
    if not config["dataset"]:
        raise ValueError("no dataset given (positional argument or dataset= in config)")
    out_dir = config["out_dir"] or os.environ.get("EEGEMO_OUT", "reports")
    config["out_dir"] = str(out_dir)

    ds = _load(config["dataset"], config["format"], config["trim_baseline"])
    params = WelchParams(segment_len=config["segment_len"], overlap=config["overlap"],
                         sample_rate_hz=ds.sample_rate_hz)
    train_config = TrainConfig(
        seed=config["seed"], knn_k=config["knn_k"], svm_c=config["svm_c"],
        svm_kernel=config["svm_kernel"], svm_gamma=config["svm_gamma"],
        svm_tol=config["svm_tol"], svm_max_passes=config["svm_max_passes"],
        mlp_hidden=config["mlp_hidden"], mlp_epochs=config["mlp_epochs"],
        mlp_batch=config["mlp_batch"], mlp_lr=config["mlp_lr"])
    report = run_grid(
        ds,
        classifiers=_split_list(config["classifiers"]),
        regions=_split_list(config["regions"]),
        bands=_split_list(config["bands"]),
        welch_params=params,
        scheme=config["scheme"],
        config=train_config,
        seed=config["seed"],
        k_folds=config["folds"],
        stratified=config["stratified"],
        standardize=config["standardize"],
        extra_config={"dataset": str(config["dataset"]),
                      "format": config["format"],
                      "trim_baseline": config["trim_baseline"],
                      "out_dir": config["out_dir"]},
    )
    for path in write_grid_reports(report, out_dir, figures=config["figures"]):
        print(f"wrote {path}")
    if args.compare is not None:
        published = load_published(None if args.compare == "" else args.compare)
        sys.stdout.write(compare_to_published(report, published))
    return 0


def cmd_stats(args) -> int:
    ds = _load(args.path, args.format)
    stats = rating_stats(ds.ratings)
    print(f"{args.path}: {stats['n_trials']} trials")
    print(f"  valence median: {stats['valence_median']:.3f}  std: {stats['valence_std']:.3f}")
    print(f"  arousal median: {stats['arousal_median']:.3f}  std: {stats['arousal_std']:.3f}")
    print(f"  std difference: {stats['std_difference']:.2f}")
    counts = "  ".join(f"{k}={v}" for k, v in stats["quadrant_counts"].items())
    print(f"  quadrant counts: {counts}")
    if args.plot:
        print(f"wrote {render_ratings_figure(ds.ratings, args.plot)}")
    return 0


def _add_input_args(p, trim=True):
    p.add_argument("path", help="dataset file (eegb or csv)")
    p.add_argument("--format", choices=("auto", "eegb", "csv"), default="auto")
    if trim:
        p.add_argument("--trim-baseline", type=int, default=0, dest="trim_baseline",
                       metavar="N", help="drop the first N samples of every trial")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eegemo",
        description="EEG emotion classification toolkit: band-power features, "
                    "median-split labels, KNN/SVM/MLP under seeded 10-fold CV.")
    parser.add_argument("--version", action="version", version=f"eegemo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a deterministic synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-std", type=float, default=0.5, dest="noise_std")
    p.add_argument("--proportions", default="0.25,0.25,0.25,0.25",
                   help="per-quadrant class proportions (HAHV,LAHV,HALV,LALV)")
    p.add_argument("--format", choices=("eegb", "csv"), default="eegb")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="check file geometry and invariants")
    _add_input_args(p, trim=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("psd", help="Welch PSD of one trial/channel as CSV")
    _add_input_args(p)
    p.add_argument("--trial", type=int, required=True)
    p.add_argument("--channel", required=True, help="channel name or index")
    p.add_argument("--segment-len", type=int, default=256, dest="segment_len")
    p.add_argument("--overlap", type=int, default=128)
    p.add_argument("--out", required=True, help="output CSV (freq_hz,power)")
    p.add_argument("--plot", default=None, help="also render a PNG figure here")
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("features", help="export band-power features + labels as CSV")
    _add_input_args(p)
    p.add_argument("--channels", default="all",
                   help="'all', a region name, or a comma list of channel names")
    p.add_argument("--bands", default=",".join(BAND_ORDER))
    p.add_argument("--scheme", choices=LABEL_SCHEMES, default="quadrant-4")
    p.add_argument("--segment-len", type=int, default=256, dest="segment_len")
    p.add_argument("--overlap", type=int, default=128)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("grid", help="run the region x band accuracy grids")
    p.add_argument("dataset", nargs="?", default=None)
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--format", choices=("auto", "eegb", "csv"), default=None)
    p.add_argument("--scheme", choices=LABEL_SCHEMES, default=None)
    p.add_argument("--classifiers", default=None)
    p.add_argument("--regions", default=None)
    p.add_argument("--bands", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--segment-len", type=int, default=None, dest="segment_len")
    p.add_argument("--overlap", type=int, default=None)
    p.add_argument("--trim-baseline", type=int, default=None, dest="trim_baseline")
    p.add_argument("--out-dir", default=None, dest="out_dir")
    p.add_argument("--no-standardize", action="store_const", const=False,
                   default=None, dest="standardize")
    p.add_argument("--no-stratify", action="store_const", const=False,
                   default=None, dest="stratified")
    p.add_argument("--no-figures", action="store_const", const=False,
                   default=None, dest="figures")
    p.add_argument("--knn-k", type=int, default=None, dest="knn_k")
    p.add_argument("--svm-c", type=float, default=None, dest="svm_c")
    p.add_argument("--svm-kernel", choices=("rbf", "linear"), default=None, dest="svm_kernel")
    p.add_argument("--svm-gamma", type=float, default=None, dest="svm_gamma")
    p.add_argument("--svm-tol", type=float, default=None, dest="svm_tol")
    p.add_argument("--svm-max-passes", type=int, default=None, dest="svm_max_passes")
    p.add_argument("--mlp-hidden", type=int, default=None, dest="mlp_hidden")
    p.add_argument("--mlp-epochs", type=int, default=None, dest="mlp_epochs")
    p.add_argument("--mlp-batch", type=int, default=None, dest="mlp_batch")
    p.add_argument("--mlp-lr", type=float, default=None, dest="mlp_lr")
    p.add_argument("--compare", nargs="?", const="", default=None, metavar="PUBLISHED_JSON",
                   help="print deltas against published accuracies "
                        "(packaged table when no path is given)")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("stats", help="descriptive rating statistics")
    _add_input_args(p, trim=False)
    p.add_argument("--plot", default=None, help="render a ratings PNG figure here")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"eegemo {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
