"""Synthetic rat EKG and the 24-bit acquisition front end."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ADC_BITS = 24
CODE_MIN = -(1 << (ADC_BITS - 1))
CODE_MAX = (1 << (ADC_BITS - 1)) - 1


class EkgConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Wave:
    """One Gaussian bump of the PQRST complex, placed on the cardiac phase."""

    amplitude: float  # volts
    center: float  # radians, R peak at 0
    width: float  # radians

    def __post_init__(self):
        if not self.width > 0:
            raise EkgConfigError(f"wave width must be > 0, got {self.width}")


def _default_waves() -> dict[str, Wave]:
    return {
        "P": Wave(0.08e-3, -math.pi / 3, 0.25),
        "Q": Wave(-0.10e-3, -math.pi / 12, 0.10),
        "R": Wave(1.00e-3, 0.0, 0.10),
        "S": Wave(-0.20e-3, math.pi / 12, 0.10),
        "T": Wave(0.25e-3, math.pi / 2, 0.40),
    }


@dataclass(frozen=True)
class EkgModelParams:
    heart_rate: float = 360.0  # beats/min
    waves: dict[str, Wave] = field(default_factory=_default_waves)
    noise_rms: float = 0.0  # volts
    full_scale: float = 2.5e-3  # ADC input range is +/- full_scale volts
    seed: int = 0

    def __post_init__(self):
        if not self.heart_rate > 0:
            raise EkgConfigError(f"heart_rate must be > 0, got {self.heart_rate}")
        if not self.noise_rms >= 0:
            raise EkgConfigError(f"noise_rms must be >= 0, got {self.noise_rms}")
        if not self.full_scale > 0:
            raise EkgConfigError(f"full_scale must be > 0, got {self.full_scale}")

    @property
    def volts_per_lsb(self) -> float:
        return self.full_scale / (1 << (ADC_BITS - 1))


@dataclass
class EkgTrace:
    """Quantized ADC output."""

    codes: np.ndarray
    volts_per_lsb: float
    sample_rate: float = 500.0
    saturated: int = 0

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.int64)
        if not self.volts_per_lsb > 0:
            raise ValueError("volts_per_lsb must be > 0")
        if self.codes.size and (self.codes.min() < CODE_MIN or self.codes.max() > CODE_MAX):
            raise ValueError("codes do not fit in 24-bit two's complement")

    @property
    def duration(self) -> float:
        return len(self.codes) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.codes)) / self.sample_rate

    @property
    def volts(self) -> np.ndarray:
        return self.codes * self.volts_per_lsb

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "code", "volts"])
            for t, c in zip(self.times, self.codes):
                writer.writerow([repr(float(t)), int(c), repr(float(c * self.volts_per_lsb))])

    @classmethod
    def from_csv(cls, path, volts_per_lsb: float | None = None) -> "EkgTrace":
        """Load a trace written by :meth:`to_csv` or an external recording.

        The sample rate comes from the time column; ``volts_per_lsb`` from the
        volts/code ratio unless given.
        """
        times, codes, volts = [], [], []
        with open(Path(path), newline="") as fh:
            for row in csv.DictReader(fh):
                times.append(float(row["time"]))
                codes.append(int(row["code"]))
                if row.get("volts") not in (None, ""):
                    volts.append(float(row["volts"]))
        codes = np.array(codes, dtype=np.int64)
        if len(times) < 2:
            raise ValueError(f"{path}: need at least two samples")
        sample_rate = (len(times) - 1) / (times[-1] - times[0])
        if volts_per_lsb is None:
            nz = codes != 0
            if not volts or not nz.any():
                raise ValueError(f"{path}: cannot infer volts_per_lsb, pass it explicitly")
            volts_per_lsb = float(np.median(np.asarray(volts)[nz] / codes[nz]))
        return cls(codes, volts_per_lsb, round(sample_rate, 9))


def synthesize(params: EkgModelParams, duration: float, sample_rate: float = 500.0) -> np.ndarray:
    """Continuous-valued EKG in volts, sampled at ``sample_rate``.

    Sum of Gaussians over the cardiac phase. The phase starts half a beat
    before the first R peak so every beat in the window is complete.
    """
    if not duration > 0:
        raise EkgConfigError(f"duration must be > 0, got {duration}")
    reach = sum(abs(w.amplitude) for w in params.waves.values()) + 5 * params.noise_rms
    if reach > params.full_scale:
        raise EkgConfigError(
            f"wave amplitudes ({reach:.3g} V incl. noise) exceed ADC full scale "
            f"{params.full_scale:.3g} V"
        )
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    phase = 2 * np.pi * t * params.heart_rate / 60.0 - np.pi
    out = np.zeros(n)
    for wave in params.waves.values():
        d = np.mod(phase - wave.center + np.pi, 2 * np.pi) - np.pi
        out += wave.amplitude * np.exp(-0.5 * (d / wave.width) ** 2)
    if params.noise_rms > 0:
        rng = np.random.default_rng(params.seed)
        out += rng.normal(0.0, params.noise_rms, n)
    return out


def quantize(volts, volts_per_lsb: float, sample_rate: float = 500.0) -> EkgTrace:
    """Round to the nearest 24-bit code; out-of-range samples are clamped and counted."""
    volts = np.asarray(volts, dtype=float)
    raw = np.rint(volts / volts_per_lsb)
    codes = np.clip(raw, CODE_MIN, CODE_MAX).astype(np.int64)
    saturated = int(np.count_nonzero(raw != codes))
    if saturated:
        warnings.warn(f"{saturated} samples clamped at ADC full scale", RuntimeWarning)
    return EkgTrace(codes, volts_per_lsb, sample_rate, saturated)


def acquire(params: EkgModelParams, duration: float, sample_rate: float = 500.0) -> EkgTrace:
    """Synthesize and quantize in one step."""
    return quantize(synthesize(params, duration, sample_rate), params.volts_per_lsb, sample_rate)
