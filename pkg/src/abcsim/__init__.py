"""Simulator for electro-quasistatic body-channel telemetry of EKG signals.

Modules follow the signal: :mod:`ekgsynth` makes the trace, :mod:`txchain`
frames and modulates it, :mod:`circuit` and :mod:`channelsim` carry it across
the body, :mod:`rxchain` recovers it and :mod:`metrics` scores the result.
:mod:`pipeline` strings them together for a :mod:`scenario`.
"""

from .channelsim import GainBurst, ImpairmentConfig, propagate, snr_at_receiver
from .circuit import ChannelParams, FootGeometry, full_transfer, simplified_gain
from .ecc import EccConfig, LinearBlockCode, hamming74
from .ekgsynth import EkgModelParams, EkgTrace, acquire
from .metrics import LinkReport, PowerModel, energy_report, pearson, windowed_correlation
from .rxchain import DecodeReport, FilterSpec, design_bandpass, receive
from .scenario import ConfigError, Scenario, load, validate
from .txchain import ModemParams, TdmSchedule, build_burst
from .waveform import Waveform

__version__ = "0.1.0"

__all__ = [
    "ChannelParams", "ConfigError", "DecodeReport", "EccConfig", "EkgModelParams", "EkgTrace",
    "FilterSpec", "FootGeometry", "GainBurst", "ImpairmentConfig", "LinearBlockCode",
    "LinkReport", "ModemParams", "PowerModel", "Scenario", "TdmSchedule", "Waveform", "acquire",
    "build_burst", "design_bandpass", "energy_report", "full_transfer", "hamming74", "load",
    "pearson", "propagate", "receive", "simplified_gain", "snr_at_receiver", "validate",
    "windowed_correlation",
]
