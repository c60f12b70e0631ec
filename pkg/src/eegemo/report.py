"""Report emitters: aligned text grids, JSON, long CSV, comparison deltas,
and the rendered matplotlib figures that accompany the delimited output.

Accuracies print with 2 decimals, rounded half-up. JSON output is fully
deterministic (fixed structure, sorted keys, no timestamps), so repeated
runs from one config are byte-identical.
"""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .evaluate import CvReport, GridReport
from .spectral import CANONICAL_BANDS, PsdEstimate

GRID_REPORT_VERSION = 1

PUBLISHED_DATA = "published_accuracies.json"

_SCHEME_TO_PUBLISHED = {"arousal-binary": "arousal", "valence-binary": "valence"}


def format_percent(x: float) -> str:
    """2-decimal half-up, the convention used by the published tables."""
    return str(Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _cell_text(cell: CvReport) -> str:
    return format_percent(cell.mean_accuracy) if cell.valid else "n/a"


def grid_to_text(report: GridReport) -> str:
    lines = ["# grid report", f"# scheme: {report.scheme}",
             "# config: " + json.dumps(report.config, sort_keys=True), ""]
    width = max(9, max(len(r) for r in report.regions) + 2)
    for clf in report.classifiers:
        lines.append(f"classifier: {clf}")
        header = f"{'band':<8}" + "".join(f"{r:>{width}}" for r in report.regions)
        lines.append(header)
        for band in report.bands:
            row = f"{band:<8}"
            for region in report.regions:
                row += f"{_cell_text(report.cell(clf, region, band)):>{width}}"
            lines.append(row)
        tops_r = ", ".join(f"{name} ({format_percent(score)})"
                           for name, score in report.top_regions[clf])
        tops_b = ", ".join(f"{name} ({format_percent(score)})"
                           for name, score in report.top_bands[clf])
        lines.append(f"top regions: {tops_r or 'n/a'}")
        lines.append(f"top bands:   {tops_b or 'n/a'}")
        invalid = [c for c in _iter_cells(report) if c.classifier == clf and not c.valid]
        for cell in invalid:
            lines.append(f"invalid cell {cell.region} x {cell.band}: {cell.diagnostic}")
        lines.append("")
    return "\n".join(lines)


def _iter_cells(report: GridReport):
    for clf in report.classifiers:
        for band in report.bands:
            for region in report.regions:
                yield report.cell(clf, region, band)


def grid_to_json(report: GridReport) -> str:
    payload = {
        "format": "grid-report",
        "version": GRID_REPORT_VERSION,
        "scheme": report.scheme,
        "config": report.config,
        "cells": [
            {
                "classifier": c.classifier,
                "region": c.region,
                "band": c.band,
                "fold_accuracies": list(c.fold_accuracies),
                "mean": c.mean_accuracy if c.valid else None,
                "mean_2dp": _cell_text(c),
                "valid": c.valid,
                "diagnostic": c.diagnostic,
            }
            for c in _iter_cells(report)
        ],
        "top_regions": {clf: [[n, s] for n, s in report.top_regions[clf]]
                        for clf in report.classifiers},
        "top_bands": {clf: [[n, s] for n, s in report.top_bands[clf]]
                      for clf in report.classifiers},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def grid_to_csv(report: GridReport) -> str:
    lines = ["# config: " + json.dumps(report.config, sort_keys=True),
             "classifier,region,band,fold,accuracy"]
    for c in _iter_cells(report):
        for fi, acc in enumerate(c.fold_accuracies):
            lines.append(f"{c.classifier},{c.region},{c.band},{fi},{float(acc)!r}")
        mean = repr(float(c.mean_accuracy)) if c.valid else "invalid"
        lines.append(f"{c.classifier},{c.region},{c.band},mean,{mean}")
    return "\n".join(lines) + "\n"


def load_published(path=None) -> dict:
    """Published reference accuracies; defaults to the packaged table."""
    if path is None:
        text = resources.files("eegemo").joinpath(f"data/{PUBLISHED_DATA}").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)


def compare_to_published(report: GridReport, published: dict) -> str:
    """Side-by-side deltas against the published grids; informational only."""
    key = _SCHEME_TO_PUBLISHED.get(report.scheme)
    if key is None or key not in published:
        return (f"no published grid for scheme {report.scheme!r}; "
                "comparison available for arousal-binary and valence-binary\n")
    table = published[key]
    lines = [f"comparison against published {key} accuracies (ours - published)",
             "classifier,region,band,ours,published,delta"]
    for c in _iter_cells(report):
        ref = table.get(c.classifier, {}).get(c.band, {}).get(c.region)
        if ref is None or not c.valid:
            continue
        ours = c.mean_accuracy
        lines.append(f"{c.classifier},{c.region},{c.band},"
                     f"{format_percent(ours)},{format_percent(ref)},"
                     f"{format_percent(ours - ref)}")
    return "\n".join(lines) + "\n"


def write_grid_reports(report: GridReport, out_dir, figures: bool = True) -> list[Path]:
    """Write text/JSON/CSV (and heatmap PNGs) for one grid run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"grid_{report.scheme}"
    written = []
    for suffix, payload in ((".txt", grid_to_text(report)),
                            (".json", grid_to_json(report)),
                            (".csv", grid_to_csv(report))):
        path = out_dir / (stem + suffix)
        path.write_text(payload, encoding="utf-8")
        written.append(path)
    if figures:
        written.extend(render_grid_figures(report, out_dir))
    return written


def render_grid_figures(report: GridReport, out_dir) -> list[Path]:
    """One annotated bands x regions heatmap per classifier."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for clf in report.classifiers:
        matrix = np.full((len(report.bands), len(report.regions)), np.nan)
        for bi, band in enumerate(report.bands):
            for ri, region in enumerate(report.regions):
                cell = report.cell(clf, region, band)
                if cell.valid:
                    matrix[bi, ri] = cell.mean_accuracy
        fig, ax = plt.subplots(figsize=(8, 4))
        shown = np.ma.masked_invalid(matrix)
        im = ax.imshow(shown, cmap="viridis", aspect="auto")
        ax.set_xticks(range(len(report.regions)), report.regions)
        ax.set_yticks(range(len(report.bands)), report.bands)
        for bi in range(matrix.shape[0]):
            for ri in range(matrix.shape[1]):
                text = "n/a" if np.isnan(matrix[bi, ri]) else format_percent(matrix[bi, ri])
                ax.text(ri, bi, text, ha="center", va="center", fontsize=8, color="w")
        ax.set_title(f"{clf} mean 10-fold accuracy (%) - {report.scheme}")
        fig.colorbar(im, ax=ax, label="accuracy (%)")
        fig.tight_layout()
        path = out_dir / f"grid_{report.scheme}_{clf}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


def psd_to_csv(psd: PsdEstimate) -> str:
    lines = ["freq_hz,power"]
    for f, p in zip(psd.freqs, psd.power):
        lines.append(f"{float(f)!r},{float(p)!r}")
    return "\n".join(lines) + "\n"


def render_psd_figure(psd: PsdEstimate, path, label: str = "") -> Path:
    """PSD line plot with the four canonical bands shaded."""
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.semilogy(psd.freqs, np.maximum(psd.power, 1e-300), lw=1.0, color="k")
    colors = ("#c6dbef", "#9ecae1", "#6baed6", "#3182bd")
    top = psd.freqs[-1]
    for band, color in zip(CANONICAL_BANDS, colors):
        if band.low_hz >= top:
            continue
        ax.axvspan(band.low_hz, min(band.high_hz, top), alpha=0.35,
                   color=color, label=band.name)
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("power (units$^2$/Hz)")
    title = "Welch PSD" + (f" - {label}" if label else "")
    ax.set_title(f"{title} ({psd.n_segments_averaged} segments)")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_ratings_figure(ratings, path) -> Path:
    """Rating scatter with median split lines plus running-mean trends."""
    v = np.array([r.valence for r in ratings])
    a = np.array([r.arousal for r in ratings])
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.scatter(v, a, s=12, alpha=0.6)
    left.axvline(float(np.median(v)), color="r", lw=1, ls="--", label="valence median")
    left.axhline(float(np.median(a)), color="b", lw=1, ls="--", label="arousal median")
    left.set_xlabel("valence")
    left.set_ylabel("arousal")
    left.set_title("ratings by trial")
    left.legend(fontsize=8)
    trials = np.arange(1, len(v) + 1)
    right.plot(trials, np.cumsum(v) / trials, label="valence running mean")
    right.plot(trials, np.cumsum(a) / trials, label="arousal running mean")
    right.set_xlabel("trial")
    right.set_ylabel("rating")
    right.set_title(f"std difference: {abs(np.std(v) - np.std(a)):.2f}")
    right.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
