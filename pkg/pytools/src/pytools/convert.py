"""Convert DEAP preprocessed recordings into the eegb container.

Reads the two distributed forms of the preprocessed data, either
MATLAB files (sXX.mat) or python pickles (sXX.dat), each holding:

    data:   (40 trials, 40 channels, 8064 samples) at 128 Hz
    labels: (40 trials, 4) ratings: valence, arousal, dominance, liking

The first 32 channels are the EEG montage; peripheral channels are
dropped. Only valence/arousal ratings are carried over. One eegb file is
written per participant plus a merged all-participants file, and a
manifest records per-file checksums.

The eegb layout (independent implementation of the documented contract):
magic ``EEGB``; version byte 1; little-endian u32 header length; UTF-8
JSON header {sample_rate_hz, n_trials, n_channels, n_samples, channels,
ratings, provenance}; little-endian float64 payload, trial-major then
channel-major then sample-major.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import pickle
import struct
import sys
from pathlib import Path

import numpy as np

EEG_CHANNELS = [
    "Fp1", "AF3", "F3", "F7", "FC5", "FC1", "C3", "T7",
    "CP5", "CP1", "P3", "P7", "PO3", "O1", "Oz", "Pz",
    "Fp2", "AF4", "Fz", "F4", "F8", "FC6", "FC2", "Cz",
    "C4", "T8", "CP6", "CP2", "P4", "P8", "PO4", "O2",
]

SAMPLE_RATE_HZ = 128.0
N_TRIALS = 40
N_EEG_CHANNELS = 32
N_SAMPLES = 8064


class ConversionError(ValueError):
    pass


def _load_source(path: Path):
    """Return (data, labels) from a .dat pickle or .mat file."""
    if path.suffix == ".dat":
        with open(path, "rb") as fh:
            payload = pickle.load(fh, encoding="latin1")
        data, labels = payload["data"], payload["labels"]
    elif path.suffix == ".mat":
        from scipy.io import loadmat
        payload = loadmat(str(path))
        if "data" not in payload or "labels" not in payload:
            raise ConversionError(f"{path}: missing 'data'/'labels' variables")
        data, labels = payload["data"], payload["labels"]
    else:
        raise ConversionError(f"{path}: unsupported extension {path.suffix!r}")
    return np.asarray(data, dtype=np.float64), np.asarray(labels, dtype=np.float64)


def _check_geometry(path: Path, data: np.ndarray, labels: np.ndarray):
    if data.ndim != 3 or data.shape[0] != N_TRIALS:
        raise ConversionError(f"{path}: expected {N_TRIALS} trials, got shape {data.shape}")
    if data.shape[1] < N_EEG_CHANNELS:
        raise ConversionError(f"{path}: wrong channel count {data.shape[1]} "
                              f"(need >= {N_EEG_CHANNELS})")
    if data.shape[2] != N_SAMPLES:
        raise ConversionError(f"{path}: expected {N_SAMPLES} samples, got {data.shape[2]}")
    if labels.ndim != 2 or labels.shape[0] != N_TRIALS or labels.shape[1] < 2:
        raise ConversionError(f"{path}: labels shape {labels.shape} lacks valence/arousal")
    if not np.all(np.isfinite(data)):
        raise ConversionError(f"{path}: non-finite samples")
    ratings = labels[:, :2]
    if np.any(ratings < 0) or np.any(ratings > 9) or not np.all(np.isfinite(ratings)):
        raise ConversionError(f"{path}: ratings outside [0, 9]")


def write_eegb(path: Path, samples: np.ndarray, ratings, provenance: str):
    """samples: (n_trials, 32, n_samples) float64; ratings: (v, a) pairs."""
    header = {
        "sample_rate_hz": SAMPLE_RATE_HZ,
        "n_trials": int(samples.shape[0]),
        "n_channels": int(samples.shape[1]),
        "n_samples": int(samples.shape[2]),
        "channels": EEG_CHANNELS,
        "ratings": [{"valence": float(v), "arousal": float(a)} for v, a in ratings],
        "provenance": provenance,
    }
    blob = json.dumps(header, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(b"EEGB")
        fh.write(struct.pack("<B", 1))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(samples.astype("<f8", copy=False).tobytes(order="C"))


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _payload_offset(path: Path) -> int:
    with open(path, "rb") as fh:
        head = fh.read(9)
        (hlen,) = struct.unpack_from("<I", head, 5)
    return 9 + hlen


def convert_deap(source_dir, out_dir) -> dict:
    """Convert every sXX.dat/.mat under source_dir; returns the manifest."""
    source_dir, out_dir = Path(source_dir), Path(out_dir)
    if not source_dir.is_dir():
        raise ConversionError(f"{source_dir}: not a directory")
    sources = sorted(p for p in source_dir.iterdir()
                     if p.suffix in (".dat", ".mat") and p.stem.startswith("s"))
    if not sources:
        raise ConversionError(f"{source_dir}: no sXX.dat or sXX.mat files found")
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    all_ratings = []
    for src in sources:
        data, labels = _load_source(src)
        _check_geometry(src, data, labels)
        eeg = np.ascontiguousarray(data[:, :N_EEG_CHANNELS, :])
        ratings = [(row[0], row[1]) for row in labels]
        out_path = out_dir / (src.stem + ".eegb")
        write_eegb(out_path, eeg, ratings, provenance=f"deap convert {src.name}")
        entries.append({"source": str(src), "output": str(out_path),
                        "trials": N_TRIALS, "sha256": _sha256(out_path)})
        all_ratings.extend(ratings)

    merged = out_dir / "all_participants.eegb"
    header = {
        "sample_rate_hz": SAMPLE_RATE_HZ,
        "n_trials": N_TRIALS * len(entries),
        "n_channels": N_EEG_CHANNELS,
        "n_samples": N_SAMPLES,
        "channels": EEG_CHANNELS,
        "ratings": [{"valence": float(v), "arousal": float(a)} for v, a in all_ratings],
        "provenance": f"deap convert merged {len(entries)} participants",
    }
    blob = json.dumps(header, separators=(",", ":")).encode("utf-8")
    with open(merged, "wb") as fh:
        fh.write(b"EEGB")
        fh.write(struct.pack("<B", 1))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for entry in entries:  # stream payloads; the merged file can be GBs
            part = Path(entry["output"])
            with open(part, "rb") as src_fh:
                src_fh.seek(_payload_offset(part))
                while True:
                    chunk = src_fh.read(1 << 20)
                    if not chunk:
                        break
                    fh.write(chunk)

    manifest = {
        "participants": entries,
        "merged": {"output": str(merged), "trials": N_TRIALS * len(entries),
                   "sha256": _sha256(merged)},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                           encoding="utf-8")
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="convert_deap",
        description="Convert DEAP preprocessed .dat/.mat files to eegb.")
    parser.add_argument("source_dir", help="directory with sXX.dat or sXX.mat files")
    parser.add_argument("out_dir", help="where to write eegb files + manifest.json")
    args = parser.parse_args(argv)
    try:
        manifest = convert_deap(args.source_dir, args.out_dir)
    except (ConversionError, OSError, pickle.UnpicklingError) as exc:
        print(f"convert_deap: error: {exc}", file=sys.stderr)
        return 1
    for entry in manifest["participants"]:
        print(f"converted {entry['source']} -> {entry['output']} "
              f"({entry['trials']} trials, sha256 {entry['sha256'][:12]}...)")
    merged = manifest["merged"]
    print(f"merged {len(manifest['participants'])} participants -> "
          f"{merged['output']} ({merged['trials']} trials)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
