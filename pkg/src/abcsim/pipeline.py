"""End-to-end runs: EKG -> frames -> OOK -> body channel -> receiver -> metrics."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import channelsim, circuit, ekgsynth, metrics, rxchain, txchain
from . import waveform as wavio
from .metrics import LinkReport
from .scenario import Scenario, snapshot

REPORT_COLUMNS = [
    "scenario", "seed", "sweep_axis", "sweep_value", "position", "correlation",
    "windowed_min", "ber", "bit_errors", "bit_erasures", "bits", "frame_loss_rate",
    "frames_sent", "frames_lost", "frame_errors", "corrections_applied",
    "recovered_by_redundancy", "mean_amplitude", "snr_db", "channel_gain", "energy_ratio",
    "abc_energy_per_cycle", "ble_energy_per_cycle", "exact_match", "params",
]


@dataclass
class PointResult:
    report: LinkReport
    position: int | None
    reference: np.ndarray
    alignment: metrics.Alignment
    timestamps: dict
    window_times: np.ndarray
    volts_per_lsb: float
    sample_rate: float
    params: dict
    tx: wavio.Waveform | None = None
    rx: wavio.Waveform | None = None


def noise_seed(seed: int, point: int) -> int:
    return int(np.random.SeedSequence([seed, point, 0xABC]).generate_state(1)[0])


def point_channel(scn: Scenario, axis: str, value) -> circuit.ChannelParams:
    if axis == "distance":
        return scn.channel.with_foot_distance(float(value))
    if axis == "c_csg":
        return replace(scn.channel, c_csg=float(value))
    return scn.channel


def shifted_impairments(scn: Scenario, t0: float, seed: int, awgn: float | None = None,
                        ) -> channelsim.ImpairmentConfig:
    """Scenario impairments with times moved from window-relative to capture time."""
    imp = scn.impairments
    return channelsim.ImpairmentConfig(
        awgn_rms=imp.awgn_rms if awgn is None else awgn,
        bursts=tuple(channelsim.GainBurst(b.start + t0, b.duration, b.multiplier)
                     for b in imp.bursts),
        distance_schedule=tuple((t + t0, d) for t, d in imp.distance_schedule),
        seed=seed,
    )


def on_mask(burst: txchain.Burst, modem: txchain.ModemParams) -> np.ndarray:
    return np.repeat(burst.bits.astype(bool), modem.samples_per_bit)


def simulate(scn: Scenario, seed: int | None = None, axis: str = "none", value=None,
             point: int = 0, position: int | None = None, keep_waveforms: bool = False,
             ) -> PointResult:
    """One sensing window through the whole link."""
    seed = scn.seed if seed is None else seed
    modem = scn.modem
    trace = ekgsynth.acquire(replace(scn.ekg, seed=seed), scn.duration, scn.ekg_sample_rate)
    # the Bluetooth path is an ideal text channel; its output is the reference
    reference = np.array(
        txchain.ble_reference_decode(txchain.ble_reference_encode(trace.codes)), dtype=np.int64
    )

    channel = point_channel(scn, axis, value)
    burst = txchain.build_burst(trace.codes, scn.schedule, modem, scn.ecc, scn.cycle_index,
                                 trim=True)
    t0 = burst.waveform.start_time
    taps = rxchain.design_bandpass(scn.filter, modem.sim_sample_rate)

    awgn = None
    signal_power = None
    if axis == "snr" or scn.impairments.awgn_rms > 0:
        mask = on_mask(burst, modem)
        if mask.any():
            signal_power = channelsim.in_band_signal_power(
                burst.waveform, channel, shifted_impairments(scn, t0, 0, 0.0), taps, mask)
        del mask
    if axis == "snr":
        if signal_power is None:
            raise channelsim.UndefinedSnrError("snr sweep needs ON bits")
        awgn = channelsim.awgn_for_snr(float(value), signal_power, modem.sim_sample_rate,
                                       scn.filter.passband)
    imp = shifted_impairments(scn, t0, noise_seed(seed, point), awgn)

    rx = channelsim.propagate(burst.waveform, channel, imp)
    tx = burst.waveform if keep_waveforms else None
    if not keep_waveforms:
        burst.waveform = burst.waveform.with_samples(np.zeros(0))

    frame_period = burst.period_bits / modem.bit_rate
    rec = rxchain.receive(rx, modem, scn.ecc, scn.filter, frame_period=frame_period,
                          origin=float(t0), expected=len(trace.codes), taps=taps,
                          block_bits=scn.block_bits, min_separation=scn.min_separation)
    if not keep_waveforms:
        rx = None
    report = rec.report
    aligned = metrics.align(report, reference)
    kept = aligned.kept

    link = LinkReport(scenario=scn.name, seed=seed, sweep_axis=axis,
                      sweep_value=None if value is None else float(value))
    volts_ref = aligned.reference * trace.volts_per_lsb
    volts_dec = aligned.decoded * trace.volts_per_lsb
    if kept.sum() >= 2:
        try:
            link.correlation = metrics.pearson(volts_dec[kept], volts_ref[kept])
        except metrics.ZeroVarianceError:
            link.correlation = 1.0 if np.array_equal(volts_dec[kept], volts_ref[kept]) else 0.0
        wt, wr = metrics.windowed_correlation(volts_dec[kept], volts_ref[kept], scn.window,
                                              scn.hop, scn.ekg_sample_rate)
        link.windowed_correlation = wr
        link.windowed_min = float(np.nanmin(wr)) if np.isfinite(wr).any() else float("nan")
    else:
        wt = np.zeros(0)
    be = metrics.bit_errors(rec.sliced, burst, rec.delay)
    link.ber, link.bit_errors, link.bit_erasures, link.bits = be.ber, be.errors, be.erasures, be.bits
    link.frames_sent = len(trace.codes)
    link.frame_loss_rate = metrics.frame_loss_rate(report, len(trace.codes))
    link.frames_lost = report.frames_lost
    link.frame_errors = report.frame_errors
    link.corrections_applied = report.corrections_applied
    link.recovered_by_redundancy = report.recovered_by_redundancy
    if report.amplitudes:
        link.mean_amplitude = float(np.mean(list(report.amplitudes.values())))
    noise = imp.awgn_rms
    if signal_power is None or noise == 0:
        link.snr_db = math.inf
    else:
        link.snr_db = 10 * math.log10(
            signal_power / (noise**2 * channelsim.noise_band_fraction(modem.sim_sample_rate,
                                                                      scn.filter.passband)))
    link.channel_gain = abs(circuit.full_transfer(channel))
    energy = metrics.energy_report(scn.power, scn.schedule)
    link.energy_ratio = float(energy.ratio)
    link.abc_energy_per_cycle = float(energy.abc_energy_per_cycle)
    link.ble_energy_per_cycle = float(energy.ble_energy_per_cycle)
    link.exact_match = bool(report.frames_lost == 0
                            and np.array_equal(aligned.decoded, aligned.reference))

    params = snapshot(scn, seed=seed, sweep={"axis": axis, "value": value},
                      derived={"awgn_rms": noise, "frame_period": frame_period,
                               "filter_taps": len(taps), "pipeline_delay": rec.delay})
    return PointResult(link, position, reference, aligned, dict(report.timestamps), wt,
                       trace.volts_per_lsb, scn.ekg_sample_rate, params, tx, rx)


def iter_points(scn: Scenario):
    """Yield ``(axis, value, point_index, position, seed)`` for every run of the sweep."""
    axis = scn.sweep.axis
    for k, value in enumerate(scn.sweep.points()):
        position = k + 1 if axis == "distance" else None
        for s in range(scn.sweep.seeds):
            yield axis, value, k, position, scn.seed + s


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True, separators=(",", ":"), default=float)
    return str(v)


def report_row(res: PointResult) -> list[str]:
    r = res.report
    values = {f.name: getattr(r, f.name) for f in fields(r)}
    values["position"] = res.position
    values["params"] = res.params
    return [_fmt(values[c]) for c in REPORT_COLUMNS]


def write_reports(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for res in results:
            w.writerow(report_row(res))


def read_reports(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_decoded(res: PointResult, path) -> None:
    """Per-sample comparison: reference code, decoded code (blank when lost)."""
    a = res.alignment
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "time", "reference_code", "decoded_code", "lost", "rx_timestamp"])
        for i in range(len(a.reference)):
            lost = bool(a.lost[i])
            w.writerow([i, repr(i / res.sample_rate), int(a.reference[i]),
                        "" if lost else int(a.decoded[i]), "1" if lost else "0",
                        "" if lost else repr(float(res.timestamps[i]))])


def tag(res: PointResult, index: int) -> str:
    r = res.report
    if r.sweep_axis == "none":
        return f"seed{r.seed}"
    return f"{r.sweep_axis}{index:02d}_seed{r.seed}"


def run(scn: Scenario, out_dir: Path | None = None, progress=None) -> list[PointResult]:
    """Run every sweep point and write ``report.csv``, decoded traces, plots, waveforms."""
    out_dir = Path(out_dir or scn.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for axis, value, k, position, seed in iter_points(scn):
        res = simulate(scn, seed, axis, value, point=k, position=position,
                       keep_waveforms=scn.waveforms)
        name = tag(res, k)
        write_decoded(res, out_dir / f"decoded_{name}.csv")
        if scn.waveforms:
            wavio.write_raw(res.tx, out_dir / f"tx_{name}.raw")
            wavio.write_raw(res.rx, out_dir / f"rx_{name}.raw")
            res.tx = res.rx = None
        results.append(res)
        if progress:
            progress(res)
    write_reports(results, out_dir / "report.csv")
    if scn.plots:
        from . import plots

        plots.emit_all(results, out_dir)
    return results
