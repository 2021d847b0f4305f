"""Command-line harness: ``abcsim <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import channelsim, ekgsynth, pipeline, rxchain, scenario, txchain
from . import waveform as wavio


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return v


def _overrides(args, sweep_axis: str | None = None) -> dict:
    ov: dict = {}
    if getattr(args, "seed", None) is not None:
        ov["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        ov["output"] = {"dir": str(args.out)}
    axis = sweep_axis or getattr(args, "sweep", None)
    if axis:
        ov["sweep"] = {"axis": axis}
        if getattr(args, "seeds", None) is not None:
            ov["sweep"]["seeds"] = args.seeds
    return ov


def _load(args, sweep_axis: str | None = None) -> scenario.Scenario:
    ov = _overrides(args, sweep_axis)
    if args.config is None:
        return scenario.load(None, ov)
    cfg = scenario.parse(Path(args.config).read_text())
    if "sweep" in ov and cfg.get("sweep", {}).get("axis") != ov["sweep"]["axis"]:
        # values listed for another axis make no sense on this one
        ov["sweep"]["values"] = []
    return scenario.load(args.config, ov)


def _progress(res) -> None:
    r = res.report
    where = f"{r.sweep_axis}={r.sweep_value:g} " if r.sweep_value is not None else ""
    print(f"  {where}seed={r.seed}: corr={r.correlation:.6f} ber={r.ber:.3g} "
          f"lost={r.frames_lost}/{r.frames_sent}", flush=True)


def cmd_run(args) -> int:
    scn = _load(args)
    out = Path(scn.out_dir)
    print(f"scenario {scn.name!r}: sweep {scn.sweep.axis}, output {out}")
    pipeline.run(scn, out, progress=_progress)
    print(f"wrote {out / 'report.csv'}")
    return 0


def cmd_sweep(args) -> int:
    return cmd_run(args)


def cmd_filter_report(args) -> int:
    scn = _load(args)
    fs = scn.modem.sim_sample_rate
    taps = rxchain.design_bandpass(scn.filter, fs)
    check = rxchain.verify_filter(taps, scn.filter, fs, n_probe=args.probes)
    spec = scn.filter
    print(f"Kaiser FIR bandpass, {len(taps)} taps at {fs:g} S/s")
    print(f"passband {spec.passband[0]:g}-{spec.passband[1]:g} Hz (+/-{spec.ripple_db:g} dB), "
          f"stopband below {spec.stopband[0]:g} / above {spec.stopband[1]:g} Hz "
          f"(<= -{spec.stop_atten_db:g} dB)")
    print(f"{'freq_hz':>12} {'resp_db':>10} {'limit_lo':>10} {'limit_hi':>10}  ok")
    for f, r, lo, hi, ok in zip(check.freqs, check.response_db, check.limit_lo, check.limit_hi,
                                check.passed):
        print(f"{f:12.0f} {r:10.2f} {lo:10.2f} {hi:10.2f}  {'yes' if ok else 'NO'}")
    print("filter meets the specification" if check.ok else "filter VIOLATES the specification")
    return 0 if check.ok else 1


def cmd_decode(args) -> int:
    scn = _load(args)
    wave = wavio.load(args.input, scn.modem.sim_sample_rate)
    if wave.sample_rate != scn.modem.sim_sample_rate:
        print(f"error: capture is {wave.sample_rate:g} S/s, modem expects "
              f"{scn.modem.sim_sample_rate:g} S/s", file=sys.stderr)
        return 2
    rec = rxchain.receive(wave, scn.modem, scn.ecc, scn.filter, block_bits=scn.block_bits,
                          min_separation=scn.min_separation)
    rep = rec.report
    out = Path(args.output)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "code", "rx_timestamp"])
        for i in rep.indices:
            w.writerow([i, rep.payloads[i], repr(float(rep.timestamps[i]))])
    print(f"decoded {rep.decoded} payloads ({rep.frame_errors} frame errors, "
          f"{rep.corrections_applied} corrections) -> {out}")
    return 0 if rep.decoded else 1


def cmd_encode(args) -> int:
    scn = _load(args)
    trace = ekgsynth.EkgTrace.from_csv(args.input)
    burst = txchain.build_burst(trace.codes, scn.schedule, scn.modem, scn.ecc, scn.cycle_index,
                                 trim=True)
    wave = burst.waveform
    if args.channel:
        t0 = wave.start_time
        imp = pipeline.shifted_impairments(scn, t0, pipeline.noise_seed(scn.seed, 0))
        wave = channelsim.propagate(wave, scn.channel, imp)
    wavio.save(wave, args.output)
    print(f"encoded {len(trace.codes)} samples into {len(burst.frames)} frames, "
          f"{wave.duration:g} s at {wave.sample_rate:g} S/s -> {args.output}")
    return 0


def cmd_schema(args) -> int:
    print(scenario.schema_text(), end="")
    return 0


def cmd_validate(args) -> int:
    text = Path(args.config).read_text() if args.config else ""
    diags = scenario.validate(text)
    for d in diags:
        print(d, file=sys.stderr)
    if diags:
        return 1
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="abcsim", description="Body-channel EKG link simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True, seed=True):
        sp.add_argument("--config", help="scenario YAML (defaults when omitted)")
        if out:
            sp.add_argument("--out", help="output directory")
        if seed:
            sp.add_argument("--seed", type=_u64, help="base seed")

    sp = sub.add_parser("run", help="run a scenario and write reports")
    common(sp)
    sp.add_argument("--sweep", choices=scenario.SWEEP_AXES, help="override the sweep axis")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run a parameter sweep")
    common(sp)
    sp.add_argument("--sweep", choices=[a for a in scenario.SWEEP_AXES if a != "none"],
                    required=True)
    sp.add_argument("--seeds", type=int, help="seeds per sweep point")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("filter-report", help="designed filter response against its spec")
    common(sp, out=False, seed=False)
    sp.add_argument("--probes", type=int, default=24)
    sp.set_defaults(func=cmd_filter_report)

    sp = sub.add_parser("decode", help="decode a waveform file offline")
    common(sp, out=False, seed=False)
    sp.add_argument("input", help="waveform (.raw or time,volts .csv)")
    sp.add_argument("output", help="decoded codes CSV")
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("encode", help="EKG CSV to transmit waveform")
    common(sp, out=False)
    sp.add_argument("input", help="EKG CSV (time,code[,volts])")
    sp.add_argument("output", help="waveform file (.raw or .csv)")
    sp.add_argument("--channel", action="store_true",
                    help="pass the waveform through the scenario's body channel")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("schema", help="print the config reference")
    sp.set_defaults(func=cmd_schema)

    sp = sub.add_parser("validate", help="check a config file")
    sp.add_argument("--config", help="scenario YAML")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except scenario.ConfigError as exc:
        for d in exc.diagnostics:
            print(f"config error: {d}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
