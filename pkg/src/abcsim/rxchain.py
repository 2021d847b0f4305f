"""Receiver post-processing for the body link.

Pipeline: causal FIR bandpass around the carrier, full-wave rectification
with a two-carrier-period moving average, a 2-means threshold per analysis
block, an edge-aligned bit clock, then frame sync on the start/stop markers
and ECC decoding.

All stages are causal; the combined delay is reported by
:func:`pipeline_delay` so decoded timestamps can be compared with the
transmit side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from . import ecc as ecc_mod
from .ecc import EccConfig
from .txchain import MARKER, MIN_GAP_BITS, ModemParams, bits_to_code, frame_length
from .waveform import Waveform


class InfeasibleFilterError(ValueError):
    pass


class NoSignalError(RuntimeError):
    pass


@dataclass(frozen=True)
class FilterSpec:
    passband: tuple[float, float] = (400e3, 600e3)
    stop_atten_db: float = 80.0
    ripple_db: float = 0.5
    transition: float = 50e3
    margin_db: float = 6.0  # designed beyond stop_atten_db

    @property
    def stopband(self) -> tuple[float, float]:
        return self.passband[0] - self.transition, self.passband[1] + self.transition


def design_bandpass(spec: FilterSpec = FilterSpec(), sample_rate: float = 3.9e6) -> np.ndarray:
    """Kaiser-window linear-phase FIR meeting ``spec`` (odd length, symmetric)."""
    lo, hi = spec.passband
    nyq = sample_rate / 2
    s_lo, s_hi = spec.stopband
    if not (0 < lo < hi < nyq):
        raise InfeasibleFilterError(f"passband {spec.passband} not inside (0, {nyq:g}) Hz")
    if not (s_lo > 0 and s_hi < nyq and spec.transition > 0):
        raise InfeasibleFilterError(
            f"transition of {spec.transition:g} Hz puts the stopband edges {spec.stopband} "
            f"outside (0, {nyq:g}) Hz"
        )
    if spec.stop_atten_db <= 0 or spec.ripple_db <= 0:
        raise InfeasibleFilterError("stop_atten_db and ripple_db must be > 0")
    # Kaiser ripple is equal in both bands; take the tighter of the two requirements
    delta_pass = (10 ** (spec.ripple_db / 20) - 1) / (10 ** (spec.ripple_db / 20) + 1)
    atten = max(spec.stop_atten_db + spec.margin_db, -20 * math.log10(delta_pass))
    numtaps, beta = signal.kaiserord(atten, spec.transition / nyq)
    numtaps |= 1
    cutoffs = [lo - spec.transition / 2, hi + spec.transition / 2]
    return signal.firwin(numtaps, cutoffs, window=("kaiser", beta), pass_zero=False,
                         fs=sample_rate, scale=False)


def response_db(taps: np.ndarray, freqs, sample_rate: float) -> np.ndarray:
    _, h = signal.freqz(taps, worN=np.atleast_1d(np.asarray(freqs, dtype=float)), fs=sample_rate)
    with np.errstate(divide="ignore"):
        return 20 * np.log10(np.abs(h))


@dataclass
class FilterCheck:
    freqs: np.ndarray
    response_db: np.ndarray
    limit_lo: np.ndarray
    limit_hi: np.ndarray

    @property
    def passed(self) -> np.ndarray:
        return (self.response_db >= self.limit_lo) & (self.response_db <= self.limit_hi)

    @property
    def ok(self) -> bool:
        return bool(np.all(self.passed))


def verify_filter(taps: np.ndarray, spec: FilterSpec, sample_rate: float,
                  n_probe: int = 64) -> FilterCheck:
    """Probe the response at ``n_probe`` frequencies spread over both stopbands and
    the passband, with the band edges and the 300/500/700 kHz points always included."""
    nyq = sample_rate / 2
    s_lo, s_hi = spec.stopband
    p_lo, p_hi = spec.passband
    fixed = [0.0, s_lo, p_lo, (p_lo + p_hi) / 2, p_hi, s_hi, nyq]
    fixed += [f for f in (300e3, 700e3) if f < s_lo or s_hi < f < nyq]
    n_rest = max(n_probe - len(fixed), 3)
    k = n_rest // 3
    probes = np.concatenate([
        fixed,
        np.linspace(0, s_lo, k + 2)[1:-1],
        np.linspace(p_lo, p_hi, k + 2)[1:-1],
        np.linspace(s_hi, nyq, n_rest - 2 * k + 2)[1:-1],
    ])
    probes = np.unique(probes)
    resp = response_db(taps, probes, sample_rate)
    in_pass = (probes >= p_lo) & (probes <= p_hi)
    lo = np.where(in_pass, -spec.ripple_db, -np.inf)
    hi = np.where(in_pass, spec.ripple_db, -spec.stop_atten_db)
    transition = ~in_pass & (probes > s_lo) & (probes < s_hi)
    hi = np.where(transition, spec.ripple_db, hi)
    return FilterCheck(probes, resp, lo, hi)


def bandpass(wave: Waveform, taps: np.ndarray) -> Waveform:
    """Causal FIR filtering; output is the same length as the input."""
    out = signal.oaconvolve(wave.samples, taps)[: len(wave)] if len(wave) else wave.samples
    return wave.with_samples(out)


def envelope_window(sample_rate: float, carrier_freq: float, periods: float = 2.0) -> int:
    return max(1, int(round(periods * sample_rate / carrier_freq)))


def envelope(filtered: Waveform, carrier_freq: float = 500e3, periods: float = 2.0) -> Waveform:
    """Full-wave rectify, then a causal moving average over ``periods`` carrier cycles."""
    w = envelope_window(filtered.sample_rate, carrier_freq, periods)
    env = signal.lfilter(np.full(w, 1.0 / w), [1.0], np.abs(filtered.samples))
    return filtered.with_samples(np.maximum(env, 0.0))


def pipeline_delay(taps: np.ndarray, sample_rate: float, carrier_freq: float = 500e3,
                   periods: float = 2.0) -> float:
    """Group delay of bandpass plus envelope averager, seconds."""
    w = envelope_window(sample_rate, carrier_freq, periods)
    return ((len(taps) - 1) / 2 + (w - 1) / 2) / sample_rate


def two_means(x: np.ndarray, max_iter: int = 100) -> tuple[float, float]:
    """1-D k-means with k=2, seeded at the extremes. Returns (low, high) centers."""
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return lo, hi
    for _ in range(max_iter):
        t = 0.5 * (lo + hi)
        upper = x > t
        new_lo, new_hi = float(x[~upper].mean()), float(x[upper].mean())
        if new_lo == lo and new_hi == hi:
            break
        lo, hi = new_lo, new_hi
    return lo, hi


def block_thresholds(env: np.ndarray, block: int, min_separation: float = 3.5,
                     noise_floor: float = 0.0) -> np.ndarray:
    """Midpoint of the 2-means centers per block; ``inf`` where a block looks idle.

    A block counts as active when its centers are at least ``min_separation``
    pooled within-cluster standard deviations apart and the high center clears
    ``noise_floor``.
    """
    n_blocks = max(1, math.ceil(len(env) / block))
    out = np.full(n_blocks, np.inf)
    for b in range(n_blocks):
        x = env[b * block:(b + 1) * block]
        if x.size < 2:
            continue
        lo, hi = two_means(x)
        if hi <= lo or hi <= noise_floor:
            continue
        t = 0.5 * (lo + hi)
        upper = x > t
        spread = math.sqrt(
            (np.sum((x[~upper] - lo) ** 2) + np.sum((x[upper] - hi) ** 2)) / x.size
        )
        if hi - lo >= min_separation * spread:
            out[b] = t
    return out


@dataclass
class SlicedBits:
    """Hard bit decisions on the recovered bit clock.

    ``sample_index`` is the decision instant (mid-bit) of each bit in the
    envelope; ``levels`` the envelope value there.
    """

    bits: np.ndarray
    sample_index: np.ndarray
    levels: np.ndarray
    sample_rate: float
    start_time: float
    samples_per_bit: int

    def __len__(self):
        return len(self.bits)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + self.sample_index / self.sample_rate

    @property
    def bit_start_times(self) -> np.ndarray:
        return self.times - (self.samples_per_bit // 2) / self.sample_rate


def threshold_and_slice(env: Waveform, modem: ModemParams = ModemParams(), block_bits: int = 64,
                        min_separation: float = 3.5, noise_floor: float = 0.0,
                        skip_bits: int = 64) -> SlicedBits:
    """Threshold the envelope and sample it once per bit.

    The bit clock snaps to every clean rising edge (one preceded by at least
    half a bit of low and followed by at least a quarter bit of high) that
    falls within half a bit of the running clock, and free-runs between
    them. Silent stretches longer than ``skip_bits`` bits (more than any
    frame can hold) are skipped once two zero bits have been emitted.
    """
    spb = modem.samples_per_bit
    half = spb // 2
    x = env.samples
    n = len(x)
    if n == 0:
        raise NoSignalError("empty envelope")
    block = block_bits * spb
    thr = np.repeat(block_thresholds(x, block, min_separation, noise_floor), block)[:n]
    high = x > thr
    if not high.any():
        raise NoSignalError("no burst rises above the noise floor")

    step = np.diff(high.astype(np.int8))
    rises = np.flatnonzero(step == 1) + 1
    falls = np.flatnonzero(step == -1) + 1
    prev_fall = np.searchsorted(falls, rises, side="right") - 1
    low_run = rises - np.where(prev_fall >= 0, falls[np.maximum(prev_fall, 0)], 0)
    next_fall = np.searchsorted(falls, rises, side="right")
    high_run = np.where(next_fall < len(falls), falls[np.minimum(next_fall, len(falls) - 1)],
                        n) - rises
    edges = rises[(low_run >= half) & (high_run >= spb // 4)]
    if edges.size == 0:
        raise NoSignalError("no clean rising edge found")
    ones_before = np.concatenate([[0], np.cumsum(high, dtype=np.int64)])

    out_idx = []
    b = int(edges[0])
    ei = 0
    zeros = 0
    n_edges = len(edges)
    while True:
        while ei < n_edges and edges[ei] < b - half:
            ei += 1
        if ei < n_edges and edges[ei] < b + half:
            b = int(edges[ei])
            ei += 1
        m = b + half
        if m >= n:
            break
        out_idx.append(m)
        zeros = 0 if high[m] else zeros + 1
        b += spb
        if zeros >= MIN_GAP_BITS:
            # fast-forward through silence longer than any frame
            while ei < n_edges and edges[ei] < b - half:
                ei += 1
            nxt = int(edges[ei]) if ei < n_edges else n
            if nxt - b > skip_bits * spb and ones_before[nxt] - ones_before[min(b, n)] == 0:
                if ei >= n_edges:
                    break
                b = nxt

    idx = np.asarray(out_idx, dtype=np.int64)
    return SlicedBits(high[idx].astype(np.uint8), idx, x[idx], env.sample_rate, env.start_time,
                      spb)


@dataclass
class DecodeReport:
    """Outcome of frame sync and ECC decoding.

    ``payloads`` maps payload index to decoded code. ``frame_errors`` counts
    on-wire frames whose markers failed or whose code words were beyond
    repair; ``frames_lost`` counts payloads with no usable copy.
    """

    payloads: dict[int, int] = field(default_factory=dict)
    timestamps: dict[int, float] = field(default_factory=dict)
    amplitudes: dict[int, float] = field(default_factory=dict)
    frame_errors: int = 0
    frames_lost: int = 0
    corrections_applied: int = 0
    uncorrectable_blocks: int = 0
    recovered_by_redundancy: int = 0
    spurious_frames: int = 0
    expected: int | None = None

    @property
    def indices(self) -> list[int]:
        return sorted(self.payloads)

    @property
    def codes(self) -> list[int]:
        return [self.payloads[i] for i in self.indices]

    @property
    def decoded(self) -> int:
        return len(self.payloads)


@dataclass
class _Copy:
    code: int
    time: float
    amplitude: float
    corrected: int


def frame_candidates(bits: np.ndarray) -> np.ndarray:
    """Bit positions where a start marker follows an idle gap (or the stream start)."""
    bits = np.asarray(bits, dtype=np.uint8)
    m = len(MARKER)
    n = len(bits)
    if n < m:
        return np.zeros(0, dtype=np.int64)
    ok = np.ones(n - m + 1, dtype=bool)
    for j, v in enumerate(MARKER):
        ok &= bits[j:n - m + 1 + j] == v
    padded = np.concatenate([np.zeros(MIN_GAP_BITS, np.uint8), bits])
    for j in range(1, MIN_GAP_BITS + 1):
        ok &= padded[MIN_GAP_BITS - j:MIN_GAP_BITS - j + len(ok)] == 0
    return np.flatnonzero(ok)


def sync_and_decode(sliced: SlicedBits, ecc: EccConfig = ecc_mod.NONE,
                    frame_period: float | None = None, origin: float | None = None,
                    expected: int | None = None, slot_tolerance: float | None = None,
                    ) -> DecodeReport:
    """Frame sync, validation, ECC decoding and repetition voting.

    A frame starts at a ``11`` marker preceded by at least two idle bits and
    spans the fixed frame length for ``ecc``. With ``frame_period`` each frame
    is placed in a packet slot by its start-bit time relative to ``origin``
    (default: the first valid frame); frames further than ``slot_tolerance``
    (default half a bit) from the slot grid are counted as spurious and the
    search resumes right after their start marker. ``expected`` is the number
    of payloads sent, used to count losses. Without ``frame_period`` frames
    are taken in arrival order.
    """
    flen = frame_length(ecc)
    m = len(MARKER)
    marker = np.array(MARKER, dtype=np.uint8)
    bits = sliced.bits
    bit_time = sliced.samples_per_bit / sliced.sample_rate
    tol = 0.5 * bit_time if slot_tolerance is None else slot_tolerance
    starts = sliced.bit_start_times
    report = DecodeReport(expected=expected)

    copies: dict[int, _Copy | None] = {}
    order = 0
    resume = 0
    for i in frame_candidates(bits):
        if i < resume or i + flen > len(bits):
            continue
        window = bits[i:i + flen]
        markers_ok = np.array_equal(window[-m:], marker)
        t = float(starts[i])
        if frame_period is not None:
            if origin is None:
                if not markers_ok:
                    report.frame_errors += 1
                    resume = i + m
                    continue
                origin = t
            slot = int(round((t - origin) / frame_period))
            if slot < 0 or abs(t - origin - slot * frame_period) > tol:
                report.spurious_frames += 1
                resume = i + m
                continue
        else:
            slot = order
            order += 1
        if not markers_ok:
            report.frame_errors += 1
            copies.setdefault(slot, None)
            resume = i + m
            continue
        resume = i + flen
        if copies.get(slot) is not None:
            continue
        payload_bits, corrected, bad = ecc_mod.decode(window[m:-m], ecc)
        report.corrections_applied += corrected
        report.uncorrectable_blocks += bad
        if bad:
            report.frame_errors += 1
            copies.setdefault(slot, None)
            continue
        amp = float(sliced.levels[i:i + flen][window.astype(bool)].mean())
        copies[slot] = _Copy(bits_to_code(payload_bits), t, amp, corrected)

    k = ecc.repetition
    n_slots = max(copies, default=-1) + 1
    n_payloads = expected if expected is not None else math.ceil(n_slots / k)
    for p in range(n_payloads):
        chosen = ecc_mod.select_copy([copies.get(p * k + c) for c in range(k)])
        if chosen is None:
            report.frames_lost += 1
            continue
        which, c = chosen
        if which > 0:
            report.recovered_by_redundancy += 1
        report.payloads[p] = c.code
        report.timestamps[p] = c.time
        report.amplitudes[p] = c.amplitude
    return report


@dataclass
class Reception:
    """Everything the receiver produced for one capture."""

    report: DecodeReport
    sliced: SlicedBits
    delay: float
    taps: np.ndarray


def receive(rx: Waveform, modem: ModemParams = ModemParams(), ecc: EccConfig = ecc_mod.NONE,
            spec: FilterSpec = FilterSpec(), frame_period: float | None = None,
            origin: float | None = None, expected: int | None = None,
            taps: np.ndarray | None = None, block_bits: int = 64,
            min_separation: float = 3.5) -> Reception:
    """Run the full receive chain on a probe capture.

    ``origin`` is the transmit-side start of the first packet slot; the
    pipeline delay is added internally.
    """
    if taps is None:
        taps = design_bandpass(spec, rx.sample_rate)
    delay = pipeline_delay(taps, rx.sample_rate, modem.carrier_freq)
    env = envelope(bandpass(rx, taps), modem.carrier_freq)
    try:
        sliced = threshold_and_slice(env, modem, block_bits, min_separation)
    except NoSignalError:
        if expected is None:
            raise
        empty = np.zeros(0, dtype=np.int64)
        sliced = SlicedBits(empty.astype(np.uint8), empty, np.zeros(0), env.sample_rate,
                            env.start_time, modem.samples_per_bit)
    del env
    report = sync_and_decode(sliced, ecc, frame_period,
                             None if origin is None else origin + delay, expected)
    return Reception(report, sliced, delay, taps)
