"""Waveform container and file formats."""

import numpy as np
import pytest

from abcsim import waveform as wavio
from abcsim.waveform import Waveform


class TestWaveform:
    def test_times(self):
        w = Waveform(np.zeros(4), 2.0, start_time=1.0)
        assert w.duration == 2.0
        assert w.times.tolist() == [1.0, 1.5, 2.0, 2.5]
        assert w.index_of(2.0) == 2


class TestFiles:
    def test_raw_roundtrip(self, tmp_path):
        w = Waveform(np.linspace(-1, 1, 1001).astype(np.float32), 3.9e6, start_time=5.0)
        wavio.save(w, tmp_path / "w.raw")
        back = wavio.load(tmp_path / "w.raw")
        assert back.sample_rate == 3.9e6 and back.start_time == 5.0
        assert np.array_equal(back.samples, w.samples)

    def test_csv_roundtrip(self, tmp_path):
        w = Waveform(np.sin(np.arange(50) / 3), 1000.0, start_time=0.25)
        wavio.save(w, tmp_path / "w.csv")
        back = wavio.load(tmp_path / "w.csv")
        assert back.sample_rate == pytest.approx(1000.0)
        assert back.start_time == pytest.approx(0.25)
        assert np.allclose(back.samples, w.samples)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "bad.raw"
        p.write_bytes(b"NOTAWAVE\n\x00\x00")
        with pytest.raises(ValueError):
            wavio.read_raw(p)
