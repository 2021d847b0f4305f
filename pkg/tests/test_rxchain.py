"""Receive side: bandpass design, envelope, slicer and frame sync."""

import math

import numpy as np
import pytest

from abcsim import channelsim, rxchain
from abcsim.channelsim import GainBurst, ImpairmentConfig, propagate
from abcsim.circuit import ChannelParams
from abcsim.ecc import EccConfig, hamming74
from abcsim.rxchain import (
    FilterSpec,
    InfeasibleFilterError,
    NoSignalError,
    SlicedBits,
    bandpass,
    design_bandpass,
    envelope,
    receive,
    response_db,
    sync_and_decode,
    threshold_and_slice,
    verify_filter,
)
from abcsim.txchain import ModemParams, build_burst, ook_modulate
from abcsim.waveform import Waveform

FS = 3.9e6
SPB = 156


@pytest.fixture(scope="module")
def taps():
    return design_bandpass(FilterSpec(), FS)


def ideal_slice(burst):
    """Perfect bit decisions straight from the transmitted bit string."""
    idx = np.arange(len(burst.bits)) * SPB + SPB // 2
    return SlicedBits(burst.bits.copy(), idx, burst.bits.astype(float), FS,
                      burst.waveform.start_time, SPB)


class TestFilterDesign:
    def test_band_requirements(self, taps):
        r = response_db(taps, [0.0, 300e3, 500e3, 700e3], FS)
        assert r[0] <= -80
        assert r[1] <= -80 and r[3] <= -80
        assert abs(r[2]) <= 0.5

    def test_linear_phase(self, taps):
        assert len(taps) % 2 == 1
        assert np.allclose(taps, taps[::-1], atol=0)

    def test_verify_passes(self, taps):
        check = verify_filter(taps, FilterSpec(), FS)
        assert check.ok
        assert {300e3, 500e3, 700e3} <= set(check.freqs.tolist())

    def test_verify_catches_short_filter(self):
        short = design_bandpass(FilterSpec(stop_atten_db=30, margin_db=0), FS)
        assert not verify_filter(short, FilterSpec(), FS).ok

    def test_infeasible(self):
        with pytest.raises(InfeasibleFilterError):
            design_bandpass(FilterSpec(passband=(1.8e6, 2.1e6)), FS)
        with pytest.raises(InfeasibleFilterError):
            design_bandpass(FilterSpec(transition=500e3), FS)


class TestEnvelope:
    def test_zero_in_zero_out(self):
        env = envelope(Waveform(np.zeros(1000), FS))
        assert not env.samples.any()

    def test_plateau_matches_periodic_oracle(self, taps):
        """Steady-state envelope of a continuous square carrier.

        The carrier repeats every 39 samples, so the filter's steady-state
        output is exactly the 39-point inverse DFT of X_k H(e^{j 2 pi k / 39}),
        with H summed by hand from the taps. The envelope is then the 16-sample
        average of its magnitude.
        """
        x = ook_modulate([1] * 40).samples
        period = 39
        xp = x[:period]
        m = np.arange(len(taps))
        k = np.arange(period)
        h = np.array([np.sum(taps * np.exp(-2j * np.pi * kk * m / period)) for kk in k])
        y = np.fft.ifft(np.fft.fft(xp) * h).real
        w = 16
        ry = np.abs(y)
        n = np.arange(len(taps) + w, len(x))
        oracle = np.array([ry[(nn - np.arange(w)) % period].mean() for nn in n])

        env = envelope(bandpass(Waveform(x, FS), taps)).samples
        assert np.allclose(env[n], oracle, rtol=1e-9, atol=1e-12)
        # sampled at 7.8 samples per cycle, the square wave's fundamental keeps its
        # continuous-time amplitude 4a/pi
        a1 = 2 * abs(np.fft.fft(xp)[5]) / period
        assert a1 == pytest.approx(4 / math.pi * 1.65, rel=1e-3)
        # harmonics 7 and 9 alias onto 400 and 600 kHz (DFT bins 4 and 6) and pass
        # the filter, so the plateau sits above the pure-tone value 2 a1 / pi
        yf = np.abs(np.fft.fft(y))
        assert set(np.argsort(yf[:20])[-3:].tolist()) == {4, 5, 6}
        assert env[n].mean() > 2 / math.pi * a1

    def test_alternating_bits_separate_at_20db(self, taps):
        modem = ModemParams()
        bits = np.tile([1, 0], 200)
        tx = ook_modulate(bits, modem)
        mask = np.repeat(bits.astype(bool), SPB)
        p_sig = channelsim.in_band_signal_power(tx, ChannelParams(), ImpairmentConfig(), taps, mask)
        gain = abs(channelsim.circuit.full_transfer(ChannelParams()))
        sigma = channelsim.awgn_for_snr(20.0, p_sig, FS)
        highs, lows = [], []
        for seed in range(5):
            rx = propagate(tx, ChannelParams(), ImpairmentConfig(awgn_rms=sigma, seed=seed))
            env = envelope(bandpass(rx, taps)).samples
            delay = int(round(rxchain.pipeline_delay(taps, FS) * FS))
            mid = np.arange(2, len(bits) - 2) * SPB + SPB // 2 + delay
            lv = env[mid]
            highs.append(lv[bits[2:-2] == 1].mean())
            lows.append(lv[bits[2:-2] == 0].mean())
        hi, lo = np.mean(highs), np.mean(lows)
        assert hi > 0.5 * gain
        assert hi - lo >= 0.8 * hi


class TestSlicer:
    def _env(self, bits, taps, scale=1.0):
        rx = ook_modulate(np.concatenate([[0] * 4, bits, [0] * 4]))
        return envelope(bandpass(rx.with_samples(rx.samples * scale), taps))

    def test_alternating_exact(self, taps):
        bits = np.tile([1, 0], 100)
        s = threshold_and_slice(self._env(bits, taps))
        got = s.bits
        first = int(np.argmax(got))
        assert got[first:first + len(bits)].tolist() == bits.tolist()

    def test_all_zero(self):
        with pytest.raises(NoSignalError):
            threshold_and_slice(Waveform(np.zeros(10 * SPB), FS))

    def test_scale_invariance(self, taps):
        rng = np.random.default_rng(5)
        bits = rng.integers(0, 2, 300)
        bits[0] = 1
        a = threshold_and_slice(self._env(bits, taps))
        b = threshold_and_slice(self._env(bits, taps, scale=0.0173))
        assert np.array_equal(a.bits, b.bits)
        assert np.array_equal(a.sample_index, b.sample_index)


class TestSync:
    def test_ideal_bits_roundtrip(self):
        codes = list(range(-50, 50))
        b = build_burst(codes, trim=True)
        rep = sync_and_decode(ideal_slice(b), frame_period=b.period_bits / 25e3,
                              origin=b.frame_times[0], expected=len(codes))
        assert rep.codes == codes
        assert rep.frames_lost == 0 and rep.frame_errors == 0

    def test_hamming_single_flip(self):
        cfg = EccConfig(code=hamming74())
        codes = [11, -22, 33, -44, 55]
        b = build_burst(codes, ecc=cfg, trim=True)
        s = ideal_slice(b)
        start = int(round((b.frame_times[3] - b.waveform.start_time) * 25e3))
        s.bits[start + 2 + 9] ^= 1  # a payload bit of frame 3
        rep = sync_and_decode(s, cfg, b.period_bits / 25e3, b.frame_times[0], len(codes))
        assert rep.codes == codes
        assert rep.corrections_applied == 1

    def test_corrupt_stop_bits_recovered_by_second_copy(self):
        cfg = EccConfig(repetition=2)
        codes = [100, 200, 300]
        b = build_burst(codes, ecc=cfg, trim=True)
        s = ideal_slice(b)
        start = int(round((b.frame_times[0] - b.waveform.start_time) * 25e3))
        s.bits[start + 27] = 0
        rep = sync_and_decode(s, cfg, b.period_bits / 25e3, b.frame_times[0], len(codes))
        assert rep.codes == codes
        assert rep.recovered_by_redundancy == 1
        assert rep.frame_errors == 1

    def test_lost_frame_counted(self):
        codes = [1, 2, 3, 4]
        b = build_burst(codes, trim=True)
        s = ideal_slice(b)
        start = int(round((b.frame_times[2] - b.waveform.start_time) * 25e3))
        s.bits[start:start + 28] = 0
        rep = sync_and_decode(s, frame_period=b.period_bits / 25e3, origin=b.frame_times[0],
                              expected=4)
        assert rep.indices == [0, 1, 3]
        assert rep.frames_lost == 1

    def test_arrival_order_without_period(self):
        b = build_burst([5, 6, 7], trim=True)
        assert sync_and_decode(ideal_slice(b)).codes == [5, 6, 7]


class TestReceive:
    def test_noiseless_roundtrip(self):
        codes = list(np.random.default_rng(1).integers(-(1 << 23), 1 << 23, 200))
        b = build_burst(codes, trim=True)
        rx = propagate(b.waveform, ChannelParams())
        rec = receive(rx, frame_period=b.period_bits / 25e3, origin=b.frame_times[0],
                      expected=len(codes))
        assert rec.report.codes == [int(c) for c in codes]
        ts = np.array([rec.report.timestamps[i] for i in range(len(codes))])
        assert np.allclose(ts - rec.delay, b.frame_times, atol=0.05 / 25e3)

    def test_erased_frame_restored_by_repetition(self):
        cfg = EccConfig(repetition=2)
        codes = [10, 20, 30, 40, 50]
        b = build_burst(codes, ecc=cfg, trim=True)
        t = b.frame_times[4]  # first copy of payload 2
        imp = ImpairmentConfig(bursts=(GainBurst(t - 0.2e-3, 1.5e-3, 0.0),))
        rx = propagate(b.waveform, ChannelParams(), imp)
        rep = receive(rx, ecc=cfg, frame_period=b.period_bits / 25e3, origin=b.frame_times[0],
                      expected=len(codes)).report
        assert rep.codes == codes
        assert rep.frames_lost == 0
        assert rep.recovered_by_redundancy == 1

    def test_silence_gives_empty_report(self):
        rx = Waveform(np.zeros(50 * SPB), FS)
        rep = receive(rx, expected=3).report
        assert rep.decoded == 0 and rep.frames_lost == 3
