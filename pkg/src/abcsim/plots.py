"""Static SVG figures from pipeline results.

Metadata and element ids are pinned so the same results give identical files.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "abcsim"
_META = {"Date": None, "Creator": "abcsim"}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def correlation_bars(results, path) -> Path:
    """One bar per trial (sweep point and seed)."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    labels = []
    corr = []
    for res in results:
        r = res.report
        lab = f"seed {r.seed}"
        if res.position is not None:
            lab = f"pos {res.position}\n{lab}"
        elif r.sweep_value is not None:
            lab = f"{r.sweep_axis}={r.sweep_value:.3g}\n{lab}"
        labels.append(lab)
        corr.append(r.correlation if np.isfinite(r.correlation) else 0.0)
    x = np.arange(len(corr))
    ax.bar(x, np.asarray(corr) * 100, color="tab:blue")
    ax.axhline(97, color="tab:red", lw=1, ls="--", label="97 %")
    ax.set_xticks(x, labels, fontsize=7)
    ax.set_ylabel("correlation (%)")
    ax.set_ylim(min(90.0, np.min(corr) * 100 - 1) if corr else 90.0, 100.5)
    ax.legend(loc="lower right")
    return _save(fig, path)


def amplitude_vs_distance(results, path) -> Path:
    """Seed-averaged received amplitude at each foot position."""
    by_pos = defaultdict(list)
    dist = {}
    for res in results:
        if res.position is None:
            continue
        by_pos[res.position].append(res.report.mean_amplitude)
        dist[res.position] = res.report.sweep_value
    pos = sorted(by_pos)
    amp = [np.nanmean(by_pos[p]) * 1e3 for p in pos]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(pos, amp, "o-")
    for p, a in zip(pos, amp):
        ax.annotate(f"{dist[p] * 1e3:g} mm", (p, a), textcoords="offset points", xytext=(0, 6),
                    ha="center", fontsize=7)
    ax.set_xlabel("position")
    ax.set_ylabel("mean envelope amplitude (mV)")
    ax.set_xticks(pos)
    return _save(fig, path)


def ber_vs_snr(results, path) -> Path:
    """Pooled bit error rate per target SNR; zero-error points sit on the floor."""
    errs = defaultdict(int)
    bits = defaultdict(int)
    for res in results:
        r = res.report
        errs[r.sweep_value] += r.bit_errors + r.bit_erasures
        bits[r.sweep_value] += r.bits
    snr = sorted(errs)
    ber = np.array([errs[s] / bits[s] if bits[s] else np.nan for s in snr])
    floor = 0.5 / max(max(bits.values(), default=1), 1)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(snr, np.maximum(ber, floor), "o-")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def windowed_correlation(res, path) -> Path:
    r = res.report
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(res.window_times, r.windowed_correlation, drawstyle="steps-post")
    ax.set_xlabel("window start (s, lost samples removed)")
    ax.set_ylabel("correlation")
    ax.set_ylim(min(0.9, float(np.nanmin(r.windowed_correlation, initial=1.0)) - 0.02), 1.01)
    return _save(fig, path)


def trace_overlay(res, path, seconds: float = 1.0) -> Path:
    """Reference and decoded EKG over the first ``seconds``."""
    a = res.alignment
    n = min(len(a.reference), int(seconds * res.sample_rate))
    t = np.arange(n) / res.sample_rate
    dec = np.where(a.lost[:n], np.nan, a.decoded[:n] * res.volts_per_lsb * 1e3)
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(t, a.reference[:n] * res.volts_per_lsb * 1e3, lw=2, alpha=0.5, label="reference")
    ax.plot(t, dec, lw=0.8, label="decoded")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("EKG (mV)")
    ax.legend(loc="upper right")
    return _save(fig, path)


def emit_all(results, out_dir) -> list[Path]:
    """Write every figure that makes sense for ``results``."""
    out_dir = Path(out_dir)
    if not results:
        return []
    paths = [correlation_bars(results, out_dir / "correlation.svg")]
    axis = results[0].report.sweep_axis
    if axis == "distance":
        paths.append(amplitude_vs_distance(results, out_dir / "amplitude_vs_distance.svg"))
    if axis == "snr":
        paths.append(ber_vs_snr(results, out_dir / "ber_vs_snr.svg"))
    first = results[0]
    if len(first.report.windowed_correlation):
        paths.append(windowed_correlation(first, out_dir / "windowed_correlation.svg"))
    paths.append(trace_overlay(first, out_dir / "trace.svg"))
    return paths
