"""Body channel applied to a transmitted waveform.

The channel is a memoryless flat gain at the carrier (the divider's phase is
a constant delay and is dropped), scaled by foot-distance segments and
dropout bursts, plus white Gaussian noise at the probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import oaconvolve

from . import circuit
from .circuit import ChannelParams
from .rxchain import FilterSpec, design_bandpass
from .waveform import Waveform


class UndefinedSnrError(ValueError):
    pass


@dataclass(frozen=True)
class GainBurst:
    """Gain multiplier over ``[start, start + duration)``, e.g. a jump."""

    start: float
    duration: float
    multiplier: float = 0.0

    def __post_init__(self):
        if not self.duration >= 0:
            raise ValueError(f"burst duration must be >= 0, got {self.duration}")
        if not 0 <= self.multiplier <= 1:
            raise ValueError(f"burst multiplier must be in [0, 1], got {self.multiplier}")


@dataclass(frozen=True)
class ImpairmentConfig:
    """``distance_schedule`` holds ``(start_time, foot_distance)`` steps; before the
    first step the channel's own foot distance applies."""

    awgn_rms: float = 0.0
    bursts: tuple[GainBurst, ...] = ()
    distance_schedule: tuple[tuple[float, float], ...] = ()
    seed: int = 0

    def __post_init__(self):
        if not self.awgn_rms >= 0:
            raise ValueError(f"awgn_rms must be >= 0, got {self.awgn_rms}")
        times = [t for t, _ in self.distance_schedule]
        if times != sorted(times):
            raise ValueError("distance_schedule must be sorted by time")
        for _, d in self.distance_schedule:
            if not d >= 0:
                raise ValueError(f"foot distance must be >= 0, got {d}")


def segment_gains(tx: Waveform, params: ChannelParams, imp: ImpairmentConfig) -> np.ndarray:
    """Per-sample channel gain, distance steps and bursts included."""
    n = len(tx)
    gain = np.full(n, abs(circuit.full_transfer(params)))
    for t, d in imp.distance_schedule:
        i = min(max(tx.index_of(t), 0), n)
        gain[i:] = abs(circuit.full_transfer(params.with_foot_distance(d)))
    for b in imp.bursts:
        i = min(max(tx.index_of(b.start), 0), n)
        j = min(max(tx.index_of(b.start + b.duration), 0), n)
        gain[i:j] *= b.multiplier
    return gain


def propagate(tx: Waveform, params: ChannelParams, imp: ImpairmentConfig = ImpairmentConfig(),
              ) -> Waveform:
    """Received probe voltage for transmitted waveform ``tx``."""
    rx = tx.samples * segment_gains(tx, params, imp)
    if imp.awgn_rms > 0:
        rng = np.random.default_rng(imp.seed)
        rx += rng.normal(0.0, imp.awgn_rms, len(rx))
    return tx.with_samples(rx)


def noise_band_fraction(sample_rate: float, band=(400e3, 600e3)) -> float:
    """Share of white-noise power that falls in ``band``."""
    return 2 * (band[1] - band[0]) / sample_rate


def in_band_signal_power(tx: Waveform, params: ChannelParams, imp: ImpairmentConfig,
                         taps: np.ndarray, on_mask: np.ndarray) -> float:
    """Mean power of the noiseless, band-filtered received signal over ON bits."""
    clean = propagate(tx, params, ImpairmentConfig(0.0, imp.bursts, imp.distance_schedule))
    filtered = oaconvolve(clean.samples, taps)[: len(clean)]
    delay = (len(taps) - 1) // 2
    mask = np.zeros(len(clean), dtype=bool)
    mask[delay:] = on_mask[: len(clean) - delay]
    if not mask.any():
        raise UndefinedSnrError("no ON bits in the waveform")
    return float(np.mean(filtered[mask] ** 2))


def snr_at_receiver(tx: Waveform, params: ChannelParams, imp: ImpairmentConfig,
                    on_mask: np.ndarray | None = None, taps: np.ndarray | None = None,
                    band=(400e3, 600e3)) -> float:
    """In-band SNR (dB) at the probe: ON-bit carrier power over white-noise power in ``band``.

    ``on_mask`` marks ON-bit samples; by default any nonzero transmit sample.
    Returns ``inf`` for a noiseless channel.
    """
    if on_mask is None:
        on_mask = tx.samples != 0
    if not np.any(on_mask):
        raise UndefinedSnrError("no ON bits in the waveform")
    if taps is None:
        taps = design_bandpass(FilterSpec(passband=band), tx.sample_rate)
    p_sig = in_band_signal_power(tx, params, imp, taps, on_mask)
    if imp.awgn_rms == 0:
        return math.inf
    p_noise = imp.awgn_rms**2 * noise_band_fraction(tx.sample_rate, band)
    return 10 * math.log10(p_sig / p_noise)


def awgn_for_snr(snr_db: float, signal_power: float, sample_rate: float,
                 band=(400e3, 600e3)) -> float:
    """Probe noise RMS that yields ``snr_db`` for in-band ``signal_power``."""
    return math.sqrt(signal_power / 10 ** (snr_db / 10) / noise_band_fraction(sample_rate, band))
