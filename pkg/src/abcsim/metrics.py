"""Link-quality and energy metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .rxchain import DecodeReport, SlicedBits
from .txchain import Burst, TdmSchedule, schedule_cycle


class ZeroVarianceError(ValueError):
    pass


class AlignmentError(ValueError):
    pass


def pearson(x, y) -> float:
    """Pearson product-moment correlation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"need equal-length 1-D sequences, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError("need at least two samples")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ZeroVarianceError("correlation undefined for a constant sequence")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def windowed_correlation(x, y, window: float, hop: float, sample_rate: float = 500.0,
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Pearson over sliding windows; returns (window start times, correlations).

    A window longer than the signal collapses to one global value. Windows
    where either input is constant give ``nan``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("sequences must be aligned (equal length)")
    w = int(round(window * sample_rate))
    h = max(1, int(round(hop * sample_rate)))
    if w < 2:
        raise ValueError(f"window of {window} s is shorter than two samples")
    if w >= len(x):
        return np.array([0.0]), np.array([pearson(x, y)])
    starts = np.arange(0, len(x) - w + 1, h)
    out = np.empty(len(starts))
    for k, s in enumerate(starts):
        try:
            out[k] = pearson(x[s:s + w], y[s:s + w])
        except ZeroVarianceError:
            out[k] = np.nan
    return starts / sample_rate, out


@dataclass
class Alignment:
    decoded: np.ndarray
    reference: np.ndarray
    lost: np.ndarray  # mask over reference indices

    @property
    def kept(self) -> np.ndarray:
        return ~self.lost


def align(report: DecodeReport, reference) -> Alignment:
    """Pair decoded payloads with the reference sequence by payload index."""
    reference = np.asarray(reference, dtype=np.int64)
    n = len(reference)
    if report.expected is not None and report.expected != n:
        raise AlignmentError(f"report expects {report.expected} payloads, reference has {n}")
    extra = [i for i in report.payloads if not 0 <= i < n]
    if extra:
        raise AlignmentError(f"decoded payload indices {extra[:5]} fall outside the reference")
    if n - report.decoded != report.frames_lost and report.expected is not None:
        raise AlignmentError(
            f"{n - report.decoded} reference samples unmatched but {report.frames_lost} "
            "recorded as lost"
        )
    lost = np.ones(n, dtype=bool)
    decoded = np.zeros(n, dtype=np.int64)
    for i, code in report.payloads.items():
        lost[i] = False
        decoded[i] = code
    return Alignment(decoded, reference, lost)


def frame_loss_rate(report: DecodeReport, n_sent: int) -> float:
    return 0.0 if n_sent == 0 else (n_sent - report.decoded) / n_sent


@dataclass
class BitErrors:
    errors: int
    erasures: int
    bits: int

    @property
    def ber(self) -> float:
        return (self.errors + self.erasures) / self.bits if self.bits else 0.0


def bit_errors(sliced: SlicedBits, burst: Burst, delay: float) -> BitErrors:
    """Compare sliced decisions with every transmitted frame bit.

    Each on-wire bit slot is matched to the decision nearest its expected
    time (transmit time plus ``delay``); a slot with no decision within half a
    bit is an erasure and counts as an error in :attr:`BitErrors.ber`.
    """
    bit_rate = burst.bit_rate
    t0 = burst.waveform.start_time
    slots = (np.arange(burst.frame_bits)[None, :]
             + np.round((burst.frame_times - t0) * bit_rate).astype(np.int64)[:, None]).ravel()
    sent = burst.bits[slots]
    expect = t0 + (slots + 0.5) / bit_rate + delay
    if len(sliced) == 0:
        return BitErrors(0, len(slots), len(slots))
    times = sliced.times
    j = np.clip(np.searchsorted(times, expect), 1, len(times) - 1)
    j = np.where(np.abs(times[j - 1] - expect) <= np.abs(times[j] - expect), j - 1, j)
    near = np.abs(times[j] - expect) <= 0.5 / bit_rate
    errors = int(np.count_nonzero(near & (sliced.bits[j] != sent)))
    return BitErrors(errors, int(np.count_nonzero(~near)), len(slots))


def amplitude_vs_distance(results) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean ON-bit envelope amplitude per foot position.

    ``results`` is an iterable of ``(position, distance, DecodeReport)``.
    Returns (positions, distances, amplitudes) sorted by position; only
    decoded frames contribute, so erased frames are excluded.
    """
    rows = sorted(results, key=lambda r: r[0])
    pos = np.array([r[0] for r in rows])
    dist = np.array([r[1] for r in rows], dtype=float)
    amp = np.array([np.mean(list(r[2].amplitudes.values())) if r[2].amplitudes else np.nan
                    for r in rows])
    return pos, dist, amp


def _exact(x) -> Fraction:
    # decimal reading of the float, so 0.0295 is 295/10000 rather than its binary neighbour
    return Fraction(repr(float(x))) if not isinstance(x, Fraction) else x


@dataclass(frozen=True)
class PowerModel:
    ble_tx_power: float = 29.5e-3
    abc_tx_power: float = 0.5e-3
    node_avg_power: float = 28.5e-3

    def __post_init__(self):
        for name in ("ble_tx_power", "abc_tx_power", "node_avg_power"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class EnergyReport:
    """Exact rationals; convert with ``float()`` for display."""

    ratio: Fraction
    abc_energy_per_cycle: Fraction  # joules
    ble_energy_per_cycle: Fraction
    abc_average_power: Fraction  # watts, averaged over the cycle
    ble_average_power: Fraction
    node_avg_power: Fraction


def energy_report(model: PowerModel = PowerModel(), schedule: TdmSchedule = TdmSchedule(),
                  ) -> EnergyReport:
    """Transmit power ratio and duty-cycled energy per TDM cycle."""
    cyc = schedule_cycle(schedule, 0)
    abc_t = _exact(cyc.abc_tx[1]) - _exact(cyc.abc_tx[0])
    ble_t = _exact(cyc.ble_tx[1]) - _exact(cyc.ble_tx[0])
    period = _exact(schedule.cycle_duration)
    p_abc, p_ble = _exact(model.abc_tx_power), _exact(model.ble_tx_power)
    e_abc, e_ble = p_abc * abc_t, p_ble * ble_t
    return EnergyReport(p_ble / p_abc, e_abc, e_ble, e_abc / period, e_ble / period,
                        _exact(model.node_avg_power))


@dataclass
class LinkReport:
    scenario: str
    seed: int
    sweep_axis: str = "none"
    sweep_value: float | None = None
    correlation: float = float("nan")
    windowed_min: float = float("nan")
    windowed_correlation: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ber: float = float("nan")
    bit_errors: int = 0
    bit_erasures: int = 0
    bits: int = 0
    frame_loss_rate: float = float("nan")
    frames_sent: int = 0
    frames_lost: int = 0
    frame_errors: int = 0
    corrections_applied: int = 0
    recovered_by_redundancy: int = 0
    mean_amplitude: float = float("nan")
    snr_db: float = float("nan")
    channel_gain: float = float("nan")
    energy_ratio: float = float("nan")
    abc_energy_per_cycle: float = float("nan")
    ble_energy_per_cycle: float = float("nan")
    exact_match: bool = False
