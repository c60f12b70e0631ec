"""Dataset model, file formats, and the synthetic EEG generator.

Two on-disk formats are supported:

eegb (binary)
    bytes 0-3   magic ``EEGB``
    byte  4     format version (1)
    bytes 5-8   little-endian u32 header length H
    H bytes     UTF-8 JSON header with keys {sample_rate_hz, n_trials,
                n_channels, n_samples, channels, ratings, provenance}
    payload     n_trials * n_channels * n_samples little-endian float64,
                trial-major then channel-major then sample-major, no padding

csv
    header row ``trial,channel,s0,...,s{n_samples-1}``, one row per
    (trial, channel) in trial-major order, channel column holds the
    channel name; a ``<name>.meta.json`` sidecar carries the same keys
    as the eegb JSON header.

The binary payload round-trips bit-exactly; CSV uses repr floats, which
also round-trip under Python's float parsing.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng

# 32-channel montage, in recording order (10-20 system).
DEAP_CHANNEL_NAMES = (
    "Fp1", "AF3", "F3", "F7", "FC5", "FC1", "C3", "T7",
    "CP5", "CP1", "P3", "P7", "PO3", "O1", "Oz", "Pz",
    "Fp2", "AF4", "Fz", "F4", "F8", "FC6", "FC2", "Cz",
    "C4", "T8", "CP6", "CP2", "P4", "P8", "PO4", "O2",
)

DEAP_SAMPLE_RATE_HZ = 128.0
DEAP_N_SAMPLES = 8064
DEAP_N_CHANNELS = 32

_MAGIC = b"EEGB"
_VERSION = 1
_HEADER_KEYS = ("sample_rate_hz", "n_trials", "n_channels", "n_samples",
                "channels", "ratings", "provenance")


class FormatError(ValueError):
    """A dataset file failed to parse or violated its declared geometry."""


class ChannelMap:
    """Ordered list of the 32 channel labels with name -> index lookup."""

    def __init__(self, names=DEAP_CHANNEL_NAMES):
        names = tuple(str(n) for n in names)
        if len(names) != 32:
            raise ValueError(f"expected exactly 32 channels, got {len(names)}")
        if len(set(names)) != len(names):
            raise ValueError("channel names must be distinct")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown channel name: {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, ChannelMap) and self.names == other.names

    def __repr__(self) -> str:
        return f"ChannelMap({self.names[0]}..{self.names[-1]})"


@dataclass(frozen=True)
class RatingRecord:
    """Self-reported valence and arousal scores, each on the 0-9 scale."""

    valence: float
    arousal: float

    def __post_init__(self):
        for name, v in (("valence", self.valence), ("arousal", self.arousal)):
            if not np.isfinite(v) or not (0.0 <= v <= 9.0):
                raise ValueError(f"{name} rating {v!r} outside [0, 9]")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Trial-major EEG samples plus per-trial ratings and channel metadata.

    `samples` has shape (n_trials, n_channels, n_samples), float64,
    C-contiguous, and is marked read-only after construction.
    """

    sample_rate_hz: float
    samples: np.ndarray
    ratings: tuple[RatingRecord, ...]
    channels: ChannelMap
    provenance: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"samples must be 3-D (trial, channel, sample), got {arr.shape}")
        if self.sample_rate_hz <= 0 or not np.isfinite(self.sample_rate_hz):
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if arr.shape[1] != len(self.channels):
            raise ValueError(f"samples have {arr.shape[1]} channels, map has {len(self.channels)}")
        if arr.shape[2] < 1:
            raise ValueError("n_samples must be positive")
        if len(self.ratings) != arr.shape[0]:
            raise ValueError(f"{len(self.ratings)} ratings for {arr.shape[0]} trials")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("samples contain non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "ratings", tuple(self.ratings))

    @property
    def n_trials(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[2]

    def is_deap_shaped(self) -> bool:
        return (self.n_channels == DEAP_N_CHANNELS
                and self.n_samples == DEAP_N_SAMPLES
                and self.sample_rate_hz == DEAP_SAMPLE_RATE_HZ)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.sample_rate_hz == other.sample_rate_hz
                and self.samples.shape == other.samples.shape
                and np.array_equal(self.samples, other.samples)
                and self.ratings == other.ratings
                and self.channels == other.channels
                and self.provenance == other.provenance)


# bands in canonical order (theta, alpha, beta, gamma); the synth spec
# indexes amplitudes and carriers by this order
SYNTH_BAND_ORDER = ("theta", "alpha", "beta", "gamma")
_SYNTH_BAND_EDGES = ((4.0, 8.0), (8.0, 12.0), (12.0, 30.0), (30.0, 64.0))

# quadrant class ids: 0 HAHV, 1 LAHV, 2 HALV, 3 LALV
SYNTH_CLASS_NAMES = ("HAHV", "LAHV", "HALV", "LALV")
_CLASS_HIGH = {0: (True, True), 1: (False, True), 2: (True, False), 3: (False, False)}

# every band separates all four classes (distinct amplitude levels per
# column), so each single-band grid cell is quadrant-separable
_DEFAULT_AMPS = (
    (2.5, 2.0, 1.5, 1.0),   # HAHV
    (1.9, 1.3, 0.9, 1.6),   # LAHV
    (1.3, 2.6, 0.5, 0.7),   # HALV
    (0.7, 0.6, 2.1, 2.2),   # LALV
)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a deterministic DEAP-shaped synthetic dataset.

    Each trial belongs to one of the four quadrant classes; its channels
    are sums of one sinusoid per band (amplitude from `band_amps`, phase
    drawn per trial/channel/band) plus white gaussian noise. Ratings are
    placed so the class quadrant is recovered by a global median split
    whenever the class mix gives each dimension equal high/low counts.
    """

    n_trials: int
    seed: int
    band_amps: tuple = _DEFAULT_AMPS              # [class][band] amplitude
    carrier_hz: tuple = (6.0, 10.0, 20.0, 40.0)   # per band
    noise_std: float = 0.5
    class_proportions: tuple = (0.25, 0.25, 0.25, 0.25)

    def __post_init__(self):
        if self.n_trials < 0:
            raise ValueError("n_trials must be >= 0")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")
        amps = np.asarray(self.band_amps, dtype=float)
        if amps.shape != (4, 4) or np.any(amps < 0) or not np.all(np.isfinite(amps)):
            raise ValueError("band_amps must be a finite non-negative 4x4 table")
        if len(self.carrier_hz) != 4:
            raise ValueError("carrier_hz needs one frequency per band")
        for f, (lo, hi) in zip(self.carrier_hz, _SYNTH_BAND_EDGES):
            if not (lo < f < min(hi, DEAP_SAMPLE_RATE_HZ / 2)):
                raise ValueError(f"carrier {f} Hz not strictly inside its band [{lo}, {hi})")
        props = np.asarray(self.class_proportions, dtype=float)
        if props.shape != (4,) or np.any(props < 0) or abs(props.sum() - 1.0) > 1e-9:
            raise ValueError("class_proportions must be 4 non-negative values summing to 1")
        if self.noise_std < 0 or not np.isfinite(self.noise_std):
            raise ValueError("noise_std must be finite and >= 0")
        object.__setattr__(self, "band_amps", tuple(tuple(map(float, row)) for row in amps))
        object.__setattr__(self, "carrier_hz", tuple(map(float, self.carrier_hz)))
        object.__setattr__(self, "class_proportions", tuple(map(float, props)))


def synth_class_sequence(spec: SynthSpec) -> list[int]:
    """Per-trial class ids: largest-remainder counts, round-robin interleaved."""
    props = np.asarray(spec.class_proportions)
    base = np.floor(props * spec.n_trials).astype(int)
    short = spec.n_trials - int(base.sum())
    remainders = props * spec.n_trials - base
    for c in sorted(range(4), key=lambda c: (-remainders[c], c))[:short]:
        base[c] += 1
    remaining = base.tolist()
    seq = []
    while len(seq) < spec.n_trials:
        for c in range(4):
            if remaining[c] > 0:
                remaining[c] -= 1
                seq.append(c)
    return seq


def synth_dataset(spec: SynthSpec) -> Dataset:
    """Deterministic synthetic dataset; a pure function of the spec.

    SplitMix64 stream layout (documented so other implementations can
    reproduce it): draws 0..2T-1 are per-trial rating jitters (valence
    then arousal); then, per (trial, channel), a block of 4 phase
    uniforms followed by n_samples Box-Muller noise draws.
    """
    n_trials = spec.n_trials
    classes = synth_class_sequence(spec)
    fs = DEAP_SAMPLE_RATE_HZ
    n_ch, n_samp = DEAP_N_CHANNELS, DEAP_N_SAMPLES

    # ratings: low anchored in [1, 4), high in (5, 8], jitter keeps values distinct
    rating_u = rng.uniforms(spec.seed, 0, 2 * n_trials)
    ratings = []
    for t, cls in enumerate(classes):
        a_high, v_high = _CLASS_HIGH[cls]
        u_v, u_a = float(rating_u[2 * t]), float(rating_u[2 * t + 1])
        valence = 8.0 - 3.0 * u_v if v_high else 1.0 + 3.0 * u_v
        arousal = 8.0 - 3.0 * u_a if a_high else 1.0 + 3.0 * u_a
        ratings.append(RatingRecord(valence=valence, arousal=arousal))

    amps = np.asarray(spec.band_amps)
    t_axis = np.arange(n_samp) / fs
    block = 4 + n_samp  # draws per (trial, channel)
    sig_base = 2 * n_trials
    samples = np.empty((n_trials, n_ch, n_samp))
    for t, cls in enumerate(classes):
        raw = rng.splitmix64_stream(spec.seed, sig_base + t * n_ch * block, n_ch * block)
        raw = raw.reshape(n_ch, block)
        phases = (raw[:, :4] >> np.uint64(11)).astype(np.float64) * 2.0**-53 * (2.0 * np.pi)
        sig = np.zeros((n_ch, n_samp))
        for b in range(4):
            sig += amps[cls, b] * np.sin(
                2.0 * np.pi * spec.carrier_hz[b] * t_axis[None, :] + phases[:, b:b + 1]
            )
        noise_raw = raw[:, 4:]
        u1 = ((noise_raw[:, 0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
        u2 = (noise_raw[:, 1::2] >> np.uint64(11)).astype(np.float64) * 2.0**-53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        sig[:, 0::2] += spec.noise_std * (r * np.cos(theta))
        sig[:, 1::2] += spec.noise_std * (r * np.sin(theta))
        samples[t] = sig

    return Dataset(
        sample_rate_hz=fs,
        samples=samples,
        ratings=ratings,
        channels=ChannelMap(),
        provenance=f"synth seed={spec.seed} trials={n_trials}",
    )


def _header_dict(ds: Dataset) -> dict:
    return {
        "sample_rate_hz": ds.sample_rate_hz,
        "n_trials": ds.n_trials,
        "n_channels": ds.n_channels,
        "n_samples": ds.n_samples,
        "channels": list(ds.channels.names),
        "ratings": [{"valence": float(r.valence), "arousal": float(r.arousal)}
                    for r in ds.ratings],
        "provenance": ds.provenance,
    }


def _dataset_from_header(header: dict, samples: np.ndarray, where: str) -> Dataset:
    try:
        ratings = tuple(RatingRecord(valence=float(r["valence"]), arousal=float(r["arousal"]))
                        for r in header["ratings"])
        channels = ChannelMap(header["channels"])
        ds = Dataset(
            sample_rate_hz=float(header["sample_rate_hz"]),
            samples=samples,
            ratings=ratings,
            channels=channels,
            provenance=str(header.get("provenance", "")),
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"{where}: {exc}") from exc
    return ds


def _parse_header(header: dict, where: str) -> tuple[int, int, int]:
    for key in _HEADER_KEYS:
        if key not in header:
            raise FormatError(f"{where}: malformed header, missing key {key!r}")
    try:
        n_trials = int(header["n_trials"])
        n_channels = int(header["n_channels"])
        n_samples = int(header["n_samples"])
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: malformed header geometry: {exc}") from exc
    if n_trials < 0 or n_channels < 1 or n_samples < 1:
        raise FormatError(f"{where}: malformed header geometry "
                          f"({n_trials} trials, {n_channels} channels, {n_samples} samples)")
    if len(header["channels"]) != n_channels:
        raise FormatError(f"{where}: header lists {len(header['channels'])} channel names "
                          f"for n_channels={n_channels}")
    if len(header["ratings"]) != n_trials:
        raise FormatError(f"{where}: header lists {len(header['ratings'])} ratings "
                          f"for n_trials={n_trials}")
    return n_trials, n_channels, n_samples


def write_dataset(ds: Dataset, path, format: str = "eegb") -> None:
    """Serialize `ds`; the eegb payload round-trips bit-exactly."""
    path = Path(path)
    if format == "eegb":
        header = json.dumps(_header_dict(ds), separators=(",", ":")).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<B", _VERSION))
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(ds.samples.astype("<f8", copy=False).tobytes(order="C"))
    elif format == "csv":
        sidecar = path.with_name(path.stem + ".meta.json")
        sidecar.write_text(json.dumps(_header_dict(ds), indent=2) + "\n", encoding="utf-8")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "channel"] + [f"s{i}" for i in range(ds.n_samples)])
            for t in range(ds.n_trials):
                for c, name in enumerate(ds.channels.names):
                    writer.writerow([t, name] + [repr(float(v)) for v in ds.samples[t, c]])
    else:
        raise ValueError(f"unknown format {format!r} (expected 'eegb' or 'csv')")


def load_dataset(path, format: str = "eegb") -> Dataset:
    """Parse a dataset file, validating geometry, finiteness, and ratings."""
    path = Path(path)
    if not path.exists():
        raise FormatError(f"{path}: file does not exist")
    if format == "eegb":
        return _load_eegb(path)
    if format == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown format {format!r} (expected 'eegb' or 'csv')")


def _load_eegb(path: Path) -> Dataset:
    data = path.read_bytes()
    where = str(path)
    if len(data) < 9 or data[:4] != _MAGIC:
        raise FormatError(f"{where}: malformed header, bad magic")
    if data[4] != _VERSION:
        raise FormatError(f"{where}: unsupported format version {data[4]}")
    (hlen,) = struct.unpack_from("<I", data, 5)
    if len(data) < 9 + hlen:
        raise FormatError(f"{where}: malformed header, truncated JSON block")
    try:
        header = json.loads(data[9:9 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{where}: malformed header: {exc}") from exc
    n_trials, n_channels, n_samples = _parse_header(header, where)
    payload = data[9 + hlen:]
    expected = n_trials * n_channels * n_samples * 8
    if len(payload) != expected:
        raise FormatError(f"{where}: payload length mismatch "
                          f"(expected {expected} bytes, found {len(payload)})")
    samples = np.frombuffer(payload, dtype="<f8").reshape(n_trials, n_channels, n_samples)
    if samples.size and not np.all(np.isfinite(samples)):
        raise FormatError(f"{where}: non-finite sample in payload")
    return _dataset_from_header(header, samples, where)


def _load_csv(path: Path) -> Dataset:
    where = str(path)
    sidecar = path.with_name(path.stem + ".meta.json")
    if not sidecar.exists():
        raise FormatError(f"{where}: missing sidecar {sidecar.name}")
    try:
        header = json.loads(sidecar.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{sidecar}: malformed header: {exc}") from exc
    n_trials, n_channels, n_samples = _parse_header(header, where)
    names = list(header["channels"])
    samples = np.empty((n_trials, n_channels, n_samples))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise FormatError(f"{where}: empty file") from None
        if head[:2] != ["trial", "channel"] or len(head) != 2 + n_samples:
            raise FormatError(f"{where}: malformed header row")
        n_rows = 0
        for row in reader:
            if not row:
                continue
            if n_rows >= n_trials * n_channels:
                raise FormatError(f"{where}: payload length mismatch (extra rows)")
            t, c = divmod(n_rows, n_channels)
            if len(row) != 2 + n_samples:
                raise FormatError(f"{where}: payload length mismatch on row {n_rows + 1}")
            if int(row[0]) != t or row[1] != names[c]:
                raise FormatError(f"{where}: row {n_rows + 1} out of trial/channel order")
            try:
                samples[t, c] = [float(v) for v in row[2:]]
            except ValueError as exc:
                raise FormatError(f"{where}: bad sample value on row {n_rows + 1}: {exc}") from exc
            n_rows += 1
    if n_rows != n_trials * n_channels:
        raise FormatError(f"{where}: payload length mismatch "
                          f"(expected {n_trials * n_channels} rows, found {n_rows})")
    if samples.size and not np.all(np.isfinite(samples)):
        raise FormatError(f"{where}: non-finite sample in payload")
    return _dataset_from_header(header, samples, where)


def trim_baseline(ds: Dataset, n_drop: int) -> Dataset:
    """Drop the first `n_drop` samples of every trial/channel."""
    if not 0 <= n_drop < ds.n_samples:
        raise ValueError(f"cannot trim {n_drop} of {ds.n_samples} samples")
    if n_drop == 0:
        return ds
    return Dataset(
        sample_rate_hz=ds.sample_rate_hz,
        samples=ds.samples[:, :, n_drop:].copy(),
        ratings=ds.ratings,
        channels=ds.channels,
        provenance=f"{ds.provenance} trim_baseline={n_drop}",
    )
