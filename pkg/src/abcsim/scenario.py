"""Scenario files: loading, validation and documentation.

A scenario is a YAML mapping merged over ``data/default.yaml``; see
:func:`schema_text` for the field reference.
"""

from __future__ import annotations

import copy
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import ecc as ecc_mod
from .channelsim import GainBurst, ImpairmentConfig
from .circuit import ChannelParams, FootGeometry
from .ekgsynth import EkgModelParams, Wave
from .metrics import PowerModel
from .rxchain import FilterSpec
from .txchain import ModemParams, TdmSchedule

SWEEP_AXES = ("none", "distance", "snr", "c_csg")
DEFAULT_SWEEPS = {
    "distance": [8e-3, 4e-3, 2e-3, 1e-3, 0.5e-3, 0.0],
    "snr": [0.0, 30 / 7, 60 / 7, 90 / 7, 120 / 7, 150 / 7, 180 / 7, 30.0],
    "c_csg": [10e-12, 25e-12, 50e-12, 100e-12, 200e-12],
}


class ConfigError(ValueError):
    """Aggregated validation diagnostics, one string per problem."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads ``1e6`` and ``3.9e6`` as floats (YAML 1.2 style)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?(?:[eE][-+]?[0-9]+)?
    |[-+]?\.[0-9_]+(?:[eE][-+]?[0-9]+)?
    |[-+]?\.(?:inf|Inf|INF)
    |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


def _yaml(text: str):
    return yaml.load(text, Loader=_Loader)


def default_config() -> dict:
    return _yaml(resources.files("abcsim").joinpath("data/default.yaml").read_text())


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "block_code":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class SweepSpec:
    axis: str = "none"
    values: list = field(default_factory=list)
    seeds: int = 1

    def points(self) -> list:
        if self.axis == "none":
            return [None]
        return list(self.values) or list(DEFAULT_SWEEPS[self.axis])


@dataclass
class Scenario:
    name: str
    seed: int
    duration: float
    ekg: EkgModelParams
    ekg_sample_rate: float
    channel: ChannelParams
    impairments: ImpairmentConfig
    schedule: TdmSchedule
    cycle_index: int
    modem: ModemParams
    ecc: ecc_mod.EccConfig
    filter: FilterSpec
    block_bits: int
    min_separation: float
    power: PowerModel
    window: float
    hop: float
    sweep: SweepSpec
    out_dir: Path
    waveforms: bool
    plots: bool
    raw: dict = field(repr=False, default_factory=dict)


def _block_code(spec):
    if spec is None:
        return None
    if spec == "hamming74":
        return ecc_mod.hamming74()
    if isinstance(spec, dict):
        return ecc_mod.LinearBlockCode(spec["generator"], spec["parity_check"],
                                       name=spec.get("name"))
    raise ValueError(f"unknown block_code {spec!r}; use null, hamming74 or a matrix pair")


def _section(diag: list, name: str, build):
    try:
        return build()
    except (ValueError, TypeError, KeyError) as exc:
        diag.append(f"{name}: {exc}")
        return None


def _unknown_keys(cfg: dict, ref: dict, prefix: str, diag: list) -> None:
    for k, v in cfg.items():
        path = f"{prefix}{k}"
        if k not in ref:
            diag.append(f"{path}: unknown field")
        elif isinstance(v, dict) and isinstance(ref[k], dict) and k not in ("waves", "block_code"):
            _unknown_keys(v, ref[k], path + ".", diag)


def _nonneg(cfg: dict, section: str, keys, diag: list) -> None:
    for k in keys:
        v = cfg.get(k)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            diag.append(f"{section}.{k}: must be a finite number, got {v!r}")
        elif v < 0:
            diag.append(f"{section}.{k}: must be >= 0, got {v!r}")


def _positive(v) -> float:
    v = float(v)
    if not v > 0:
        raise ValueError(f"must be > 0, got {v}")
    return v


def build(cfg: dict, base_dir: Path | None = None) -> Scenario:
    """Build a Scenario from a merged config dict; raises ConfigError."""
    diag: list[str] = []
    ref = default_config()
    _unknown_keys(cfg, ref, "", diag)

    ch = cfg.get("channel", {})
    n_diag = len(diag)
    _nonneg(ch, "channel", ("c_g_tx", "c_csg", "c_l", "c_skin", "r_skin", "r_body"), diag)
    channel_ok = len(diag) == n_diag

    e = cfg["ekg"]
    ekg = _section(diag, "ekg", lambda: EkgModelParams(
        heart_rate=float(e["heart_rate"]),
        waves={k: Wave(float(w["amplitude"]), float(w["center"]), float(w["width"]))
               for k, w in e["waves"].items()},
        noise_rms=float(e["noise_rms"]),
        full_scale=float(e["full_scale"]),
        seed=int(cfg["seed"]),
    ))
    if ekg is not None:
        reach = sum(abs(w.amplitude) for w in ekg.waves.values()) + 5 * ekg.noise_rms
        if reach > ekg.full_scale:
            diag.append(f"ekg.waves: amplitudes reach {reach:.3g} V, above full_scale "
                        f"{ekg.full_scale:.3g} V")
    _section(diag, "ekg.sample_rate", lambda: _positive(e["sample_rate"]))
    _section(diag, "duration", lambda: _positive(cfg["duration"]))

    foot = _section(diag, "channel.foot", lambda: FootGeometry(**ch["foot"]))
    channel = None
    if foot is not None and channel_ok:
        channel = _section(diag, "channel", lambda: ChannelParams(
            **{k: float(v) for k, v in ch.items() if k != "foot"}, foot=foot))

    imp_cfg = cfg["impairments"]
    impairments = _section(diag, "impairments", lambda: ImpairmentConfig(
        awgn_rms=float(imp_cfg["awgn_rms"]),
        bursts=tuple(GainBurst(**b) for b in imp_cfg["bursts"]),
        distance_schedule=tuple((float(t), float(d)) for t, d in imp_cfg["distance_schedule"]),
        seed=int(cfg["seed"]),
    ))

    s = dict(cfg["schedule"])
    cycle_index = int(s.pop("cycle_index", 0))
    schedule = _section(diag, "schedule", lambda: TdmSchedule(**{k: float(v) for k, v in s.items()}))
    if schedule is not None:
        _section(diag, "schedule", schedule.validate)
    if cycle_index < 0:
        diag.append("schedule.cycle_index: must be >= 0")

    modem = _section(diag, "modem", lambda: ModemParams(**{k: float(v) for k, v in cfg["modem"].items()}))
    if modem is not None:
        _section(diag, "modem", modem.validate)
        if channel is not None and channel.f_carrier != modem.carrier_freq:
            diag.append("channel.f_carrier: must equal modem.carrier_freq")

    ec = cfg["ecc"]
    code = _section(diag, "ecc.block_code", lambda: _block_code(ec["block_code"]))
    ecc_cfg = _section(diag, "ecc", lambda: ecc_mod.EccConfig(int(ec["repetition"]), code))
    if ecc_cfg is not None:
        _section(diag, "ecc", lambda: ecc_cfg.coded_payload_bits())
        if isinstance(ec["repetition"], float) and not float(ec["repetition"]).is_integer():
            diag.append("ecc.repetition: must be an integer")

    r = cfg["receiver"]
    filt = _section(diag, "receiver", lambda: FilterSpec(
        passband=tuple(float(x) for x in r["passband"]), stop_atten_db=float(r["stop_atten_db"]),
        ripple_db=float(r["ripple_db"]), transition=float(r["transition"])))
    if filt is not None and modem is not None:
        from .rxchain import design_bandpass
        _section(diag, "receiver", lambda: design_bandpass(filt, modem.sim_sample_rate))
    _section(diag, "receiver.block_bits", lambda: _positive(int(r["block_bits"])))
    _section(diag, "receiver.min_separation", lambda: _positive(r["min_separation"]))

    power = _section(diag, "power", lambda: PowerModel(**{k: float(v) for k, v in cfg["power"].items()}))

    a = cfg["analysis"]
    _section(diag, "analysis.window", lambda: _positive(a["window"]))
    _section(diag, "analysis.hop", lambda: _positive(a["hop"]))

    sw = cfg["sweep"]
    sweep = _section(diag, "sweep", lambda: SweepSpec(
        str(sw["axis"]), [float(v) for v in sw.get("values") or []], int(sw.get("seeds", 1))))
    if sweep is None:
        pass
    elif sweep.axis not in SWEEP_AXES:
        diag.append(f"sweep.axis: must be one of {', '.join(SWEEP_AXES)}, got {sweep.axis!r}")
    elif sweep.axis == "distance" and any(v < 0 for v in sweep.values):
        diag.append("sweep.values: distances must be >= 0")
    elif sweep.axis == "c_csg" and any(v < 0 for v in sweep.values):
        diag.append("sweep.values: capacitances must be >= 0")
    if sweep is not None and sweep.seeds < 1:
        diag.append("sweep.seeds: must be >= 1")

    # airtime check with the configured payload count
    if None not in (ekg, schedule, modem, ecc_cfg) and not diag:
        from .txchain import frame_length, packet_plan
        n = int(round(float(cfg["duration"]) * float(e["sample_rate"])))
        _section(diag, "schedule", lambda: packet_plan(n * ecc_cfg.repetition,
                                                       frame_length(ecc_cfg), schedule, modem))

    if diag:
        raise ConfigError(diag)

    o = cfg["output"]
    out_dir = Path(o["dir"])
    if base_dir is not None and not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    return Scenario(
        name=str(cfg["name"]), seed=int(cfg["seed"]), duration=float(cfg["duration"]),
        ekg=ekg, ekg_sample_rate=float(e["sample_rate"]), channel=channel,
        impairments=impairments, schedule=schedule, cycle_index=cycle_index, modem=modem,
        ecc=ecc_cfg, filter=filt, block_bits=int(r["block_bits"]),
        min_separation=float(r["min_separation"]), power=power, window=float(a["window"]),
        hop=float(a["hop"]), sweep=sweep, out_dir=out_dir, waveforms=bool(o["waveforms"]),
        plots=bool(o["plots"]), raw=cfg,
    )


def parse(text: str) -> dict:
    data = _yaml(text) if text.strip() else {}
    if not isinstance(data, dict):
        raise ConfigError(["config: top level must be a mapping"])
    return data


def load(source=None, overrides: dict | None = None) -> Scenario:
    """Load a scenario from a path, YAML text or dict, merged over the defaults."""
    base_dir = None
    if source is None:
        user = {}
    elif isinstance(source, dict):
        user = source
    elif isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                      and Path(source).exists()):
        try:
            user = parse(Path(source).read_text())
        except yaml.YAMLError as exc:
            raise ConfigError([f"config: YAML syntax error: {exc}"]) from None
    else:
        try:
            user = parse(source)
        except yaml.YAMLError as exc:
            raise ConfigError([f"config: YAML syntax error: {exc}"]) from None
    cfg = _merge(default_config(), user)
    if overrides:
        cfg = _merge(cfg, overrides)
    return build(cfg, base_dir)


def validate(text: str) -> list[str]:
    """Diagnostics for config text; an empty list means valid."""
    try:
        load(text if text.strip() else {})
    except ConfigError as exc:
        return exc.diagnostics
    return []


def schema_text() -> str:
    """Field reference: the commented defaults file."""
    header = (
        "# Scenario configuration (YAML). Every field is optional; omitted fields take\n"
        "# the values below. Units are SI. Sweep axis values: distance in m, snr in dB,\n"
        "# c_csg in F. Run `abcsim validate --config FILE` to check a file.\n\n"
    )
    return header + resources.files("abcsim").joinpath("data/default.yaml").read_text()


def snapshot(scn: Scenario, **extra) -> dict:
    """Parameter snapshot for report provenance."""
    snap = copy.deepcopy(scn.raw)
    snap.pop("output", None)
    snap.update(extra)
    return _jsonable(snap)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x
