"""Uniformly sampled voltage signals and their file formats.

Raw format: one ASCII header line, then little-endian float32 samples::

    ABCWAVE 1 sample_rate=3900000 start_time=5 count=19500000\n
    <count * 4 bytes>

CSV format: header ``time,volts`` then one row per sample.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = "ABCWAVE"
FORMAT_VERSION = 1


@dataclass
class Waveform:
    samples: np.ndarray
    sample_rate: float
    start_time: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self.samples)) / self.sample_rate

    def index_of(self, t: float) -> int:
        return int(round((t - self.start_time) * self.sample_rate))

    def with_samples(self, samples) -> "Waveform":
        return Waveform(samples, self.sample_rate, self.start_time)


def write_raw(wave: Waveform, path) -> None:
    header = (
        f"{MAGIC} {FORMAT_VERSION} sample_rate={wave.sample_rate!r} "
        f"start_time={wave.start_time!r} count={len(wave)}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(wave.samples.astype("<f4").tobytes())


def read_raw(path) -> Waveform:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if len(header) < 2 or header[0] != MAGIC:
            raise ValueError(f"{path}: not an {MAGIC} file")
        if int(header[1]) != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {header[1]}")
        fields = dict(item.split("=", 1) for item in header[2:])
        count = int(fields["count"])
        data = np.frombuffer(fh.read(), dtype="<f4")
    if data.size != count:
        raise ValueError(f"{path}: header says {count} samples, found {data.size}")
    return Waveform(data.astype(float), float(fields["sample_rate"]), float(fields["start_time"]))


def write_csv(wave: Waveform, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "volts"])
        for t, v in zip(wave.times, wave.samples):
            writer.writerow([repr(float(t)), repr(float(v))])


def read_csv(path, sample_rate: float | None = None) -> Waveform:
    """Read a ``time,volts`` CSV; non-uniform or off-rate captures are resampled."""
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    t, v = data[:, 0], data[:, 1]
    if len(t) < 2:
        raise ValueError(f"{path}: need at least two samples")
    native = (len(t) - 1) / (t[-1] - t[0])
    if sample_rate is None:
        sample_rate = native
    if abs(native - sample_rate) > 1e-6 * sample_rate or not np.allclose(
        np.diff(t), 1 / native, rtol=1e-3
    ):
        grid = t[0] + np.arange(int((t[-1] - t[0]) * sample_rate) + 1) / sample_rate
        v = np.interp(grid, t, v)
    return Waveform(v, float(sample_rate), float(t[0]))


def load(path, sample_rate: float | None = None) -> Waveform:
    """Dispatch on file suffix: ``.csv`` or raw."""
    if Path(path).suffix.lower() == ".csv":
        return read_csv(path, sample_rate)
    return read_raw(path)


def save(wave: Waveform, path) -> None:
    if Path(path).suffix.lower() == ".csv":
        write_csv(wave, path)
    else:
        write_raw(wave, path)
