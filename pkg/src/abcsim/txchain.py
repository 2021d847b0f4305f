"""Transmit side: TDM scheduling, framing, OOK synthesis, Bluetooth reference.

Wire format of one body-link frame (bits in transmit order)::

    1 1 | payload, MSB first | 1 1

The uncoded payload is the 24-bit two's-complement ADC code, so a frame is 28
bits. With a block code the payload is the coded word (42 bits for
Hamming(7,4), frame 46 bits). Frames start on a common bit grid, one per
packet period, and are separated by at least two bit durations of silence.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ecc as ecc_mod
from .ecc import EccConfig
from .waveform import Waveform

PAYLOAD_BITS = 24
MARKER = (1, 1)
FRAME_BITS = PAYLOAD_BITS + 2 * len(MARKER)
MIN_GAP_BITS = 2
BLE_MIN_BANDWIDTH = 45e3  # bits/s, excluding stack overhead
BLE_DELIMITER = ","


class ScheduleError(ValueError):
    pass


class FrameError(ValueError):
    """Start or stop marker is not ``11``."""


class BurstOverflowError(ValueError):
    pass


class BleParseError(ValueError):
    pass


@dataclass(frozen=True)
class TdmSchedule:
    """Durations in seconds. Sensing opens each cycle; both radios transmit afterwards."""

    sense_duration: float = 5.0
    abc_tx_duration: float = 5.0
    ble_tx_duration: float = 10.0
    cycle_duration: float = 15.0
    packet_period: float = 2e-3

    def validate(self) -> None:
        for name in ("sense_duration", "abc_tx_duration", "ble_tx_duration", "cycle_duration",
                     "packet_period"):
            if not getattr(self, name) > 0:
                raise ScheduleError(f"{name} must be > 0, got {getattr(self, name)}")
        room = self.cycle_duration - self.sense_duration
        if self.abc_tx_duration > room + 1e-12:
            raise ScheduleError(
                f"abc_tx_duration {self.abc_tx_duration} s overlaps the next sensing window "
                f"(only {room} s between sensing windows)"
            )
        if self.ble_tx_duration > room + 1e-12:
            raise ScheduleError(
                f"ble_tx_duration {self.ble_tx_duration} s overlaps the next sensing window "
                f"(only {room} s between sensing windows)"
            )


@dataclass(frozen=True)
class CycleIntervals:
    """Half-open ``(start, end)`` intervals, seconds."""

    sense: tuple[float, float]
    abc_tx: tuple[float, float]
    ble_tx: tuple[float, float]
    idle: tuple[float, float]


def schedule_cycle(schedule: TdmSchedule, cycle_index: int) -> CycleIntervals:
    schedule.validate()
    if cycle_index < 0:
        raise ScheduleError("cycle_index must be >= 0")
    t0 = cycle_index * schedule.cycle_duration
    sense = (t0, t0 + schedule.sense_duration)
    abc = (sense[1], sense[1] + schedule.abc_tx_duration)
    ble = (sense[1], sense[1] + schedule.ble_tx_duration)
    idle = (max(abc[1], ble[1]), t0 + schedule.cycle_duration)
    return CycleIntervals(sense, abc, ble, idle)


@dataclass(frozen=True)
class ModemParams:
    carrier_freq: float = 500e3
    duty: float = 0.5
    bit_rate: float = 25e3
    tx_amplitude: float = 3.3  # pin swing, volts
    sim_sample_rate: float = 3.9e6

    def validate(self) -> None:
        if not 0 < self.duty < 1:
            raise ValueError(f"duty must be in (0, 1), got {self.duty}")
        for name in ("carrier_freq", "bit_rate", "sim_sample_rate"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.tx_amplitude >= 0:
            raise ValueError(f"tx_amplitude must be >= 0, got {self.tx_amplitude}")
        spb = self.sim_sample_rate / self.bit_rate
        if abs(spb - round(spb)) > 1e-9 or round(spb) < 1:
            raise ValueError(
                f"sim_sample_rate / bit_rate = {spb:g} is not a positive integer"
            )
        if self.carrier_freq >= self.sim_sample_rate / 2:
            raise ValueError("carrier_freq must be below the simulation Nyquist rate")

    @property
    def samples_per_bit(self) -> int:
        self.validate()
        return int(round(self.sim_sample_rate / self.bit_rate))

    @property
    def bit_duration(self) -> float:
        return 1.0 / self.bit_rate


def code_to_bits(code: int, width: int = PAYLOAD_BITS) -> np.ndarray:
    """Two's-complement ``code`` as ``width`` bits, MSB first."""
    lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    if not lo <= code <= hi:
        # also accept the unsigned view of the same bits
        if not 0 <= code < (1 << width):
            raise ValueError(f"code {code} does not fit in {width} bits")
    u = int(code) & ((1 << width) - 1)
    return np.array([(u >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_code(bits) -> int:
    """MSB-first bits to a sign-extended integer."""
    bits = np.asarray(bits, dtype=np.uint8)
    width = bits.size
    u = 0
    for b in bits:
        u = (u << 1) | int(b)
    if width and u >> (width - 1):
        u -= 1 << width
    return u


def wrap(payload_bits) -> np.ndarray:
    """Surround payload bits with start and stop markers."""
    m = np.array(MARKER, dtype=np.uint8)
    return np.concatenate([m, np.asarray(payload_bits, dtype=np.uint8), m])


def unwrap(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    m = len(MARKER)
    if bits.size < 2 * m:
        raise FrameError(f"frame of {bits.size} bits is shorter than its markers")
    if tuple(bits[:m]) != MARKER:
        raise FrameError(f"bad start bits {bits[:m].tolist()}")
    if tuple(bits[-m:]) != MARKER:
        raise FrameError(f"bad stop bits {bits[-m:].tolist()}")
    return bits[m:-m]


def frame(code: int) -> np.ndarray:
    """24-bit ADC code -> 28 on-wire bits."""
    return wrap(code_to_bits(code))


def deframe(bits) -> int:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != FRAME_BITS:
        raise FrameError(f"expected {FRAME_BITS} bits, got {bits.size}")
    return bits_to_code(unwrap(bits))


def encode_frame(code: int, config: EccConfig = ecc_mod.NONE) -> np.ndarray:
    """Frame with the payload passed through the block code, if any."""
    return wrap(ecc_mod.encode(code_to_bits(code), config))


def frame_length(config: EccConfig = ecc_mod.NONE) -> int:
    return config.coded_payload_bits(PAYLOAD_BITS) + 2 * len(MARKER)


def _carrier(n: int, modem: ModemParams, offset: int = 0) -> np.ndarray:
    """Square carrier of +/- A/2 for samples ``offset .. offset+n-1``."""
    fs, fc, half = modem.sim_sample_rate, modem.carrier_freq, modem.tx_amplitude / 2
    fs_r, fc_r = Fraction(fs).limit_denominator(10**6), Fraction(fc).limit_denominator(10**6)
    if fs_r == fs and fc_r == fc:
        # exact: carrier repeats every `period` samples
        ratio = fc_r / fs_r
        period = ratio.denominator
        k = np.arange(period, dtype=np.int64) * ratio.numerator % period
        pattern = np.where(k < modem.duty * period, half, -half)
        return np.resize(np.roll(pattern, -(offset % period)), n)
    phase = np.mod((offset + np.arange(n)) * (fc / fs), 1.0)
    return np.where(phase < modem.duty, half, -half)


def ook_modulate(bits, modem: ModemParams = ModemParams(), start_time: float = 0.0,
                 start_sample: int = 0) -> Waveform:
    """On-off keyed square carrier, phase-continuous from ``start_sample``.

    A 1 bit is ``samples_per_bit`` samples of the carrier, a 0 bit is silence.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    spb = modem.samples_per_bit
    gate = np.repeat(bits.astype(float), spb)
    return Waveform(gate * _carrier(gate.size, modem, start_sample), modem.sim_sample_rate,
                    start_time)


@dataclass
class Burst:
    """One ABC transmission window.

    ``frame_times`` are the start-bit instants (s); ``payload_index`` maps each
    on-wire frame to its source payload (repeated frames share an index);
    ``bits`` is the on-air bit timeline of the whole window.
    """

    waveform: Waveform
    frame_times: np.ndarray
    payload_index: np.ndarray
    frames: list
    bits: np.ndarray
    period_bits: int
    frame_bits: int
    bit_rate: float

    @property
    def airtime(self) -> float:
        return len(self.frames) * self.frame_bits / self.bit_rate


def packet_plan(n_frames: int, frame_bits: int, schedule: TdmSchedule,
                modem: ModemParams) -> tuple[int, int]:
    """Returns ``(window_bits, period_bits)`` or raises BurstOverflowError."""
    window_bits = int(math.floor(schedule.abc_tx_duration * modem.bit_rate + 1e-9))
    airtime = n_frames * frame_bits / modem.bit_rate
    if airtime > schedule.abc_tx_duration + 1e-12:
        raise BurstOverflowError(
            f"{n_frames} frames x {frame_bits} bits need {airtime:.4g} s of airtime, "
            f"ABC window is {schedule.abc_tx_duration:g} s"
        )
    period_bits = int(round(schedule.packet_period * modem.bit_rate))
    if n_frames and n_frames * period_bits > window_bits:
        period_bits = window_bits // n_frames
    if n_frames and period_bits < frame_bits + MIN_GAP_BITS:
        raise BurstOverflowError(
            f"{n_frames} frames of {frame_bits} bits leave less than {MIN_GAP_BITS} "
            f"idle bits between frames in a {schedule.abc_tx_duration:g} s window"
        )
    return window_bits, period_bits


def build_burst(payloads, schedule: TdmSchedule = TdmSchedule(),
                modem: ModemParams = ModemParams(), ecc: EccConfig = ecc_mod.NONE,
                cycle_index: int = 0, trim: bool = False) -> Burst:
    """Frame, pace and modulate one window's payloads.

    The waveform covers the whole ABC window of ``cycle_index`` and is silent
    outside the frames. With ``trim`` it stops one packet period after the
    last frame instead, which saves work when the window is mostly idle.
    """
    schedule.validate()
    modem.validate()
    payloads = [int(p) for p in payloads]
    frames = ecc_mod.repeat_frames([encode_frame(p, ecc) for p in payloads], ecc)
    index = np.repeat(np.arange(len(payloads)), ecc.repetition)
    flen = frame_length(ecc)
    window_bits, period_bits = packet_plan(len(frames), flen, schedule, modem)
    if trim:
        window_bits = min(window_bits, (len(frames) + 1) * max(period_bits, flen))

    bits = np.zeros(window_bits, dtype=np.uint8)
    starts = np.arange(len(frames)) * period_bits
    for s, f in zip(starts, frames):
        bits[s:s + flen] = f

    t0 = schedule_cycle(schedule, cycle_index).abc_tx[0]
    wave = ook_modulate(bits, modem, start_time=t0)
    times = t0 + starts / modem.bit_rate
    return Burst(wave, times, index, frames, bits, period_bits, flen, modem.bit_rate)


def ble_reference_encode(payloads) -> str:
    """ADC codes as decimal text separated by commas."""
    return BLE_DELIMITER.join(str(int(p)) for p in payloads)


_INT = re.compile(r"[+-]?\d+\Z")


def ble_reference_decode(text: str) -> list[int]:
    if text == "":
        return []
    out = []
    for i, token in enumerate(text.split(BLE_DELIMITER)):
        if not _INT.match(token.strip()) or token != token.strip():
            raise BleParseError(f"token {i} ({token!r}) is not an integer")
        out.append(int(token))
    return out


def abc_payload_rate(n_payloads: int, schedule: TdmSchedule, config: EccConfig = ecc_mod.NONE,
                     ) -> float:
    """On-air bit rate needed to ship one sensing window's payloads in the ABC window."""
    n_frames = n_payloads * config.repetition
    return n_frames * frame_length(config) / schedule.abc_tx_duration
