"""Config loading, the end-to-end pipeline and the command-line harness."""

import json
from pathlib import Path

import numpy as np
import pytest

from abcsim import cli, pipeline, scenario
from abcsim.scenario import ConfigError

ROOT = Path(__file__).resolve().parents[1]
SHORT = {"duration": 0.4, "output": {"plots": False}}


class TestValidate:
    def test_defaults_ok(self):
        assert scenario.validate("") == []

    def test_shipped_configs_ok(self):
        for path in sorted((ROOT / "configs").glob("*.yaml")):
            assert scenario.validate(path.read_text()) == [], path.name

    def test_negative_capacitance_named(self):
        diags = scenario.validate("channel: {c_csg: -1.0e-12}")
        assert any("channel.c_csg" in d for d in diags)

    def test_non_integer_samples_per_bit(self):
        diags = scenario.validate("modem: {bit_rate: 24000}")
        assert any("162.5" in d for d in diags)

    def test_diagnostics_aggregate(self):
        diags = scenario.validate("channel: {c_csg: -1.0e-12}\nmodem: {bit_rate: 24000}\nfoo: 1")
        assert len(diags) == 3

    def test_airtime_overflow(self):
        diags = scenario.validate("ecc: {repetition: 2}")
        assert any("airtime" in d for d in diags)

    def test_bad_yaml(self):
        assert scenario.validate("channel: [unclosed")

    def test_scientific_notation_is_float(self):
        scn = scenario.load("modem: {sim_sample_rate: 3.9e6}\nseed: 3\n")
        assert scn.modem.sim_sample_rate == 3.9e6 and scn.seed == 3

    def test_load_raises_config_error(self):
        with pytest.raises(ConfigError) as exc:
            scenario.load({"sweep": {"axis": "bogus"}})
        assert exc.value.diagnostics

    def test_schema_mentions_sections(self):
        text = scenario.schema_text()
        for key in ("channel:", "impairments:", "modem:", "ecc:", "receiver:", "sweep:"):
            assert key in text


class TestPipeline:
    def test_clean_point(self):
        scn = scenario.load(SHORT)
        res = pipeline.simulate(scn)
        r = res.report
        assert r.exact_match and r.correlation == 1.0 and r.ber == 0.0
        assert r.frames_sent == 200 and r.frames_lost == 0
        assert r.energy_ratio == 59.0

    def test_report_rows_carry_provenance(self, tmp_path):
        scn = scenario.load({**SHORT, "name": "prov", "sweep": {"axis": "distance",
                                                               "values": [4e-3, 0.0]}})
        pipeline.run(scn, tmp_path)
        rows = pipeline.read_reports(tmp_path / "report.csv")
        assert [r["position"] for r in rows] == ["1", "2"]
        for row in rows:
            assert row["scenario"] == "prov" and row["seed"] == "1"
            params = json.loads(row["params"])
            assert params["sweep"]["axis"] == "distance"
            assert "channel" in params and "modem" in params
        assert float(rows[0]["mean_amplitude"]) < float(rows[1]["mean_amplitude"])

    def test_byte_identical(self, tmp_path):
        cfg = {**SHORT, "impairments": {"awgn_rms": 5e-3},
               "channel": {"foot": {"distance": 8e-3}}, "output": {"plots": True}}
        pipeline.run(scenario.load(cfg), tmp_path / "a")
        pipeline.run(scenario.load(cfg), tmp_path / "b")
        for name in ("report.csv", "decoded_seed1.csv", "correlation.svg", "trace.svg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_changes_noise(self):
        cfg = {**SHORT, "impairments": {"awgn_rms": 8e-3},
               "channel": {"foot": {"distance": 8e-3}}}
        a = pipeline.simulate(scenario.load({**cfg, "seed": 1})).report
        b = pipeline.simulate(scenario.load({**cfg, "seed": 2})).report
        assert (a.bit_errors, a.bit_erasures) != (b.bit_errors, b.bit_erasures)

    def test_snr_axis_hits_target(self):
        scn = scenario.load({**SHORT, "sweep": {"axis": "snr", "values": [10.0]}})
        r = pipeline.simulate(scn, axis="snr", value=10.0).report
        assert r.snr_db == pytest.approx(10.0)

    def test_waveform_dumps(self, tmp_path):
        scn = scenario.load({"duration": 0.1, "output": {"plots": False, "waveforms": True}})
        pipeline.run(scn, tmp_path)
        from abcsim import waveform as wavio
        rx = wavio.read_raw(tmp_path / "rx_seed1.raw")
        assert rx.start_time == 5.0 and len(rx) > 0


class TestCli:
    def test_validate_ok(self, capsys):
        assert cli.main(["validate", "--config", str(ROOT / "configs" / "baseline.yaml")]) == 0
        assert "ok" in capsys.readouterr().out

    def test_validate_fails_with_diagnostics(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("channel: {c_l: -1.0e-12}\n")
        assert cli.main(["validate", "--config", str(bad)]) == 1
        assert "channel.c_l" in capsys.readouterr().err

    def test_run_bad_config_exits_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("modem: {bit_rate: 24000}\n")
        assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_run_and_seed(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("duration: 0.2\noutput: {plots: false}\n")
        assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"),
                         "--seed", "42"]) == 0
        rows = pipeline.read_reports(tmp_path / "o" / "report.csv")
        assert rows[0]["seed"] == "42" and rows[0]["exact_match"] == "1"

    def test_sweep_overrides_axis(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("duration: 0.2\noutput: {plots: true}\n"
                       "sweep: {axis: c_csg, values: [1.0e-11]}\n")
        assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o"),
                         "--sweep", "distance"]) == 0
        rows = pipeline.read_reports(tmp_path / "o" / "report.csv")
        assert len(rows) == 6 and {r["sweep_axis"] for r in rows} == {"distance"}
        assert (tmp_path / "o" / "amplitude_vs_distance.svg").exists()

    def test_filter_report(self, capsys):
        assert cli.main(["filter-report"]) == 0
        out = capsys.readouterr().out
        assert "meets the specification" in out and "427 taps" in out

    def test_encode_decode_roundtrip(self, tmp_path):
        from abcsim.ekgsynth import EkgModelParams, acquire
        tr = acquire(EkgModelParams(), 0.3)
        tr.to_csv(tmp_path / "ekg.csv")
        assert cli.main(["encode", str(tmp_path / "ekg.csv"), str(tmp_path / "tx.raw"),
                         "--channel"]) == 0
        assert cli.main(["decode", str(tmp_path / "tx.raw"), str(tmp_path / "dec.csv")]) == 0
        dec = np.loadtxt(tmp_path / "dec.csv", delimiter=",", skiprows=1, ndmin=2)
        assert dec[:, 1].astype(int).tolist() == tr.codes.tolist()

    def test_schema(self, capsys):
        assert cli.main(["schema"]) == 0
        assert "sweep:" in capsys.readouterr().out

    def test_bad_seed(self):
        with pytest.raises(SystemExit):
            cli.main(["run", "--seed", "-1"])
