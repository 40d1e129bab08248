"""Result export: CSV rows, JSON metadata sidecars, and SVG plots.

CSV bodies are deterministic byte-for-byte for a fixed (config, seed), so
they double as regression fixtures. Alongside each curve CSV goes a
``<path>.meta.json`` sidecar holding the fully resolved configuration, the
SNR convention, any run warnings, and a git-style content hash of the CSV
body.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os

import numpy as np

from . import harness

__all__ = [
    "CSV_HEADER",
    "AOA_CSV_HEADER",
    "csv_body",
    "emit",
    "parse_csv",
    "curve_metadata",
    "git_blob_sha1",
    "aoa_rows",
    "emit_aoa",
]

CSV_HEADER = "snr_db,bit_errors,total_bits,ber"
AOA_CSV_HEADER = "user,aoa_estimate_deg,configured_aoa_deg,distance_m,direction_deg"

SNR_DEFINITION = (
    "snr_db is the average post-combiner symbol SNR: complex AWGN of variance "
    "num_rx_antennas * mean_rx_power / snr_linear is added per receive antenna "
    "sample, so the combiner output averages snr_linear per symbol; equals "
    "Es/N0 for a single-antenna AWGN link"
)


def git_blob_sha1(data: bytes) -> str:
    """Hash bytes the way git hashes a blob object."""
    head = f"blob {len(data)}\0".encode()
    return hashlib.sha1(head + data).hexdigest()


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def csv_body(curve: harness.BerCurve) -> str:
    # repr() of a Python float is its shortest round-trip form, so parsing
    # the CSV reproduces the in-memory values exactly.
    lines = [CSV_HEADER]
    ber = curve.ber
    for s, e, n, b in zip(curve.snr_db, curve.bit_errors, curve.total_bits, ber):
        lines.append(f"{float(s)!r},{int(e)},{int(n)},{float(b)!r}")
    return "\n".join(lines) + "\n"


def curve_metadata(curve: harness.BerCurve) -> dict:
    """Sidecar payload: resolved config, seed, warnings, content hash."""
    body = csv_body(curve).encode()
    meta = {
        "name": curve.name,
        "content_sha1": git_blob_sha1(body),
        "snr_definition": SNR_DEFINITION,
        "warnings": list(curve.warnings),
        "elapsed_s": curve.elapsed_s,
    }
    if curve.config is not None:
        meta["config"] = dataclasses.asdict(curve.config)
        meta["seed"] = curve.config.seed
    return meta


def emit(curve: harness.BerCurve, path, format: str = "csv"):
    """Write the curve to ``path``; csv also writes ``path + '.meta.json'``."""
    if format == "csv":
        _write_text(path, csv_body(curve))
        _write_text(
            str(path) + ".meta.json",
            json.dumps(curve_metadata(curve), indent=2, sort_keys=True) + "\n",
        )
    elif format == "svg":
        _plot_svg(curve, path)
    else:
        raise ValueError(f"format must be 'csv' or 'svg', got {format!r}")
    return path


def parse_csv(path) -> harness.BerCurve:
    """Read a curve CSV back; ber is recomputed from the integer columns."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: not a BER curve CSV (expected header {CSV_HEADER!r})")
    snr, err, bits = [], [], []
    for ln in lines[1:]:
        s, e, n, _ = ln.split(",")
        snr.append(float(s))
        err.append(int(e))
        bits.append(int(n))
    return harness.BerCurve(
        name=os.path.splitext(os.path.basename(str(path)))[0],
        snr_db=np.asarray(snr, dtype=np.float64),
        bit_errors=np.asarray(err, dtype=np.int64),
        total_bits=np.asarray(bits, dtype=np.int64),
    )


def _plot_svg(curve: harness.BerCurve, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ber = curve.ber
    pos = ber > 0
    if pos.any():
        ax.semilogy(curve.snr_db[pos], ber[pos], marker="o", lw=1.2, color="C0")
    # Zero-error points are shown at their upper confidence bound 1/bits.
    zero = (~pos) & (curve.total_bits > 0)
    if zero.any():
        ax.semilogy(
            curve.snr_db[zero],
            1.0 / curve.total_bits[zero],
            ls="none",
            marker="v",
            mfc="none",
            color="C0",
        )
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    ax.set_title(curve.name)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def aoa_rows(report: harness.AoaReport) -> list[tuple[int, float, float, float, float]]:
    """One row per configured link, paired with the nearest estimate.

    Estimates are assigned greedily without reuse; links left without a
    peak (fewer spectrum peaks than sources) get NaN.
    """
    est = [float(a) for a in np.atleast_1d(report.estimated_deg)]
    rows = []
    for i in range(report.link_angles_deg.size):
        truth = float(report.link_angles_deg[i])
        if est:
            j = int(np.argmin([abs(e - truth) for e in est]))
            e = est.pop(j)
        else:
            e = float("nan")
        rows.append(
            (
                i + 1,
                e,
                truth,
                float(report.distances_m[i]),
                float(report.directions_deg[i]),
            )
        )
    return rows


def emit_aoa(report: harness.AoaReport, path):
    """Write the per-user angle table as CSV."""
    lines = [AOA_CSV_HEADER]
    for user, est, truth, dist, direction in aoa_rows(report):
        lines.append(f"{user},{est!r},{truth!r},{dist!r},{direction!r}")
    _write_text(path, "\n".join(lines) + "\n")
    return path
