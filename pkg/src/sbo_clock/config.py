"""TOML run configuration: strict schema, presets, overrides, serialization.

Every physical key carries its unit as a suffix (_hz, _s, _k, _m, _rad;
dimensionless keys carry none). Unknown sections or keys are rejected so a
typo cannot silently fall back to a default. parse() materializes defaults,
so parse -> serialize -> parse is the identity on the resolved mapping.
"""

from __future__ import annotations

import importlib.resources
import math
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import numpy as np

from .errors import ConfigError
from .params import (AtomSpecies, CosineWave, DriveConfig,
                     LatticeEnsembleConfig, PulseConfig, TabulatedWave,
                     strontium_87)
from .spectroscopy import ProtocolConfig

__all__ = [
    "parse_config",
    "parse_config_text",
    "raw_from_text",
    "read_raw",
    "resolve",
    "apply_overrides",
    "serialize_config",
    "preset_names",
    "preset_raw",
    "load_preset",
    "merge_configs",
    "build_species",
    "build_drive",
    "build_lattice",
    "build_pulse",
    "build_protocol",
    "spectrum_grid",
    "trace_grid",
    "scan_axes",
]

_REQ = object()  # required-key sentinel

# (key, type tag, default); _REQ means the key must appear when the section does
_SCHEMA: dict[str, list[tuple]] = {
    "species": [
        ("name", "str", None),
        ("mass_kg", "float", None),
        ("lambda_lattice_m", "float", None),
        ("lambda_clock_m", "float", None),
        ("recoil_freq_hz", "float", None),
        ("soc_phase_rad", "float", None),
    ],
    "drive": [
        ("waveform", "str", _REQ),
        ("amplitude_hz", "float", None),
        ("samples", "float_list", None),
        ("nu_s_hz", "float", _REQ),
        ("n_res", "int", 1),
        ("delta_frac", "float", 0.0),
        ("f1_override", "float", None),
    ],
    "lattice": [
        ("j_nz_hz", "float", _REQ),
        ("c_coeff_hz", "float", 0.0),
        ("nu_r_hz", "float", _REQ),
        ("n_sites", "int", _REQ),
        ("s_max", "int", _REQ),
        ("temperature_k", "float", _REQ),
        ("coupling_sign", "int", 1),
        ("dressed_weights", "bool", True),
    ],
    "pulse1": [
        ("g_eff_hz", "float", None),
        ("bare_g0_hz", "float", None),
        ("detuning_hz", "float", _REQ),
        ("duration_s", "float", None),
        ("sideband", "int", 0),
    ],
    "pulse2": [
        ("g_eff_hz", "float", None),
        ("bare_g0_hz", "float", None),
        ("detuning_hz", "float", _REQ),
        ("duration_s", "float", None),
        ("sideband", "int", 0),
    ],
    "protocol": [
        ("wait_periods", "int", 0),
        ("wait_offset_s", "float", 0.0),
        ("sideband_set", "int_list", [-1, 0, 1]),
    ],
    "spectrum": [
        ("detuning_min_hz", "float", _REQ),
        ("detuning_max_hz", "float", _REQ),
        ("points", "int", _REQ),
        ("sidebands", "int_list", [-1, 0, 1]),
    ],
    "trace": [
        ("t_min_s", "float", 0.0),
        ("t_max_s", "float", _REQ),
        ("points", "int", _REQ),
        ("sum_sidebands", "bool", True),
    ],
    "scan": [
        ("axes", "str_list", _REQ),
        ("threads", "int", 1),
        ("grid_cap", "int", 10_000_000),
        ("delta1_min_hz", "float", None),
        ("delta1_max_hz", "float", None),
        ("delta1_points", "int", None),
        ("delta2_min_hz", "float", None),
        ("delta2_max_hz", "float", None),
        ("delta2_points", "int", None),
        ("g1_min_hz", "float", None),
        ("g1_max_hz", "float", None),
        ("g1_points", "int", None),
        ("g2_min_hz", "float", None),
        ("g2_max_hz", "float", None),
        ("g2_points", "int", None),
        ("t_min_s", "float", None),
        ("t_max_s", "float", None),
        ("t_points", "int", None),
    ],
    "fisher": [
        ("n_atoms", "float", 1.0),
    ],
    "optimize": [
        ("t_min_s", "float", _REQ),
        ("t_max_s", "float", _REQ),
        ("coarse_points", "int", 512),
        ("refine_rounds", "int", 4),
        ("refine_points", "int", 65),
        ("report_offsets_s", "float_list", []),
    ],
    "gravity": [
        ("g_m_per_s2", "float", None),
        ("uncertainty_hz", "float", None),
    ],
    "oracle": [
        ("kind", "str", _REQ),
        ("hop", "int", 1),
        ("sideband", "int", 0),
        ("tol", "float", 1e-12),
        ("samples_per_period", "int", 512),
    ],
}

_SECTION_ORDER = list(_SCHEMA)
_SCAN_AXES = ("delta1", "delta2", "g1", "g2", "t")


def _coerce(section: str, key: str, tag: str, value: Any) -> Any:
    where = f"{section}.{key}"
    if tag == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if tag == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
        return int(value)
    if tag == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean")
        return value
    if tag == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    if tag.endswith("_list"):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be an array")
        inner = tag[:-5]
        return [_coerce(section, key, inner, v) for v in value]
    raise AssertionError(f"unhandled schema tag {tag}")


def _validate_section(section: str, raw: dict) -> dict:
    schema = _SCHEMA[section]
    known = {k for k, _, _ in schema}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown key {section}.{key}")
    out = {}
    for key, tag, default in schema:
        if key in raw:
            out[key] = _coerce(section, key, tag, raw[key])
        elif default is _REQ:
            raise ConfigError(f"missing required key {section}.{key}")
        else:
            out[key] = default
    _section_rules(section, out)
    return out


def _section_rules(section: str, cfg: dict) -> None:
    """Cross-key constraints that a per-key schema cannot express."""
    if section == "species":
        explicit = [cfg["mass_kg"], cfg["lambda_lattice_m"], cfg["lambda_clock_m"]]
        if cfg["name"] is None:
            if any(v is None for v in explicit):
                raise ConfigError(
                    "species needs either name or all of mass_kg, "
                    "lambda_lattice_m, lambda_clock_m")
        elif any(v is not None for v in explicit):
            raise ConfigError("species.name excludes explicit mass/wavelengths")
        elif cfg["name"] != "sr87":
            raise ConfigError(f"unknown species.name '{cfg['name']}'")
    elif section == "drive":
        if cfg["waveform"] == "cosine":
            if cfg["amplitude_hz"] is None:
                raise ConfigError("missing required key drive.amplitude_hz")
            if cfg["samples"] is not None:
                raise ConfigError("drive.samples applies to tabulated waveforms only")
        elif cfg["waveform"] == "tabulated":
            if cfg["samples"] is None:
                raise ConfigError("missing required key drive.samples")
            if cfg["amplitude_hz"] is not None:
                raise ConfigError("drive.amplitude_hz applies to cosine waveforms only")
        else:
            raise ConfigError("drive.waveform must be 'cosine' or 'tabulated'")
    elif section in ("pulse1", "pulse2"):
        has_g = cfg["g_eff_hz"] is not None
        has_g0 = cfg["bare_g0_hz"] is not None
        if has_g == has_g0:
            raise ConfigError(
                f"{section} needs exactly one of g_eff_hz or bare_g0_hz")
    elif section == "scan":
        for axis in cfg["axes"]:
            if axis not in _SCAN_AXES:
                raise ConfigError(
                    f"scan axis '{axis}' unknown; valid: {', '.join(_SCAN_AXES)}")
            for part in _axis_keys(axis):
                if cfg[part] is None:
                    raise ConfigError(f"missing required key scan.{part}")
        if len(set(cfg["axes"])) != len(cfg["axes"]):
            raise ConfigError("scan.axes must not repeat an axis")
    elif section == "oracle":
        if cfg["kind"] not in ("hopping", "rabi", "pulse"):
            raise ConfigError("oracle.kind must be hopping, rabi, or pulse")


def _axis_keys(axis: str) -> tuple:
    unit = "s" if axis == "t" else "hz"
    return (f"{axis}_min_{unit}", f"{axis}_max_{unit}", f"{axis}_points")


def raw_from_text(text: str) -> dict:
    """TOML text to an unvalidated mapping; only the table shape is checked."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for section, table in raw.items():
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table")
    return raw


def read_raw(path) -> dict:
    with open(path, "rb") as fh:
        data = fh.read()
    return raw_from_text(data.decode("utf-8"))


def parse_config_text(text: str) -> dict:
    """Parse and validate a TOML document into the resolved config mapping."""
    return _validate_tree(raw_from_text(text))


def parse_config(path) -> dict:
    return _validate_tree(read_raw(path))


def _validate_tree(raw: dict) -> dict:
    for section in raw:
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
    return {s: _validate_section(s, raw[s]) for s in _SECTION_ORDER if s in raw}


def merge_configs(base: dict, update: dict) -> dict:
    """Second mapping wins key-by-key inside each section.

    Meant for raw (pre-validation) mappings, where a partial overlay such
    as a user file on top of a preset need not stand alone; validate the
    merged result with resolve().
    """
    out = {s: dict(v) for s, v in base.items()}
    for section, table in update.items():
        cur = out.setdefault(section, {})
        cur.update(table)
    return {s: out[s] for s in _SECTION_ORDER if s in out}


def resolve(raw: dict) -> dict:
    """Validate a raw mapping and materialize defaults."""
    return _validate_tree(raw)


def apply_overrides(cfg: dict, assignments) -> dict:
    """Apply dotted-path TOML assignments like drive.nu_s_hz=1500.

    The value text is parsed as a TOML literal; the result is re-validated
    in full so overrides obey the same schema as files. None values (unset
    optionals of an already-resolved mapping) count as absent.
    """
    raw = {s: {k: v for k, v in table.items() if v is not None}
           for s, table in cfg.items()}
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        path, value_text = item.split("=", 1)
        parts = path.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(
                f"override key '{path.strip()}' must be section.key")
        section, key = parts[0].strip(), parts[1].strip()
        try:
            value = tomllib.loads(f"v = {value_text.strip()}")["v"]
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(
                f"override value for {section}.{key} is not a TOML literal: "
                f"{value_text.strip()}") from exc
        raw.setdefault(section, {})[key] = value
    return _validate_tree(raw)


def _toml_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError("cannot serialize a non-finite number")
        return repr(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, list):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize config value {value!r}")


def serialize_config(cfg: dict) -> str:
    """Deterministic TOML text for a resolved config mapping.

    Sections and keys appear in schema order; None (unset optional) keys are
    skipped, so the output re-parses to the identical mapping.
    """
    lines = []
    for section in _SECTION_ORDER:
        if section not in cfg:
            continue
        lines.append(f"[{section}]")
        table = cfg[section]
        for key, _, _ in _SCHEMA[section]:
            if key in table and table[key] is not None:
                lines.append(f"{key} = {_toml_scalar(table[key])}")
        lines.append("")
    return "\n".join(lines)


def preset_names() -> list:
    root = importlib.resources.files("sbo_clock.presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def preset_raw(name: str) -> dict:
    root = importlib.resources.files("sbo_clock.presets")
    res = root / f"{name}.toml"
    if not res.is_file():
        raise ConfigError(
            f"unknown preset '{name}'; available: {', '.join(preset_names())}")
    return raw_from_text(res.read_text(encoding="utf-8"))


def load_preset(name: str) -> dict:
    return _validate_tree(preset_raw(name))


def _need(cfg: dict, section: str) -> dict:
    if section not in cfg:
        raise ConfigError(f"missing section [{section}]")
    return cfg[section]


def build_species(cfg: dict) -> AtomSpecies:
    sec = _need(cfg, "species")
    if sec["name"] == "sr87":
        sp = strontium_87(recoil_freq=sec["recoil_freq_hz"]
                          if sec["recoil_freq_hz"] is not None else 3441.0)
        if sec["soc_phase_rad"] is not None:
            sp = AtomSpecies(mass=sp.mass, lambda_lattice=sp.lambda_lattice,
                             lambda_clock=sp.lambda_clock,
                             recoil_freq=sp.recoil_freq,
                             soc_phase=sec["soc_phase_rad"])
        return sp
    return AtomSpecies(mass=sec["mass_kg"],
                       lambda_lattice=sec["lambda_lattice_m"],
                       lambda_clock=sec["lambda_clock_m"],
                       recoil_freq=sec["recoil_freq_hz"],
                       soc_phase=sec["soc_phase_rad"])


def build_drive(cfg: dict) -> DriveConfig:
    sec = _need(cfg, "drive")
    if sec["waveform"] == "cosine":
        wave = CosineWave(amplitude=sec["amplitude_hz"])
    else:
        wave = TabulatedWave(samples=np.asarray(sec["samples"], dtype=float))
    return DriveConfig(waveform=wave, nu_s=sec["nu_s_hz"], n_res=sec["n_res"],
                       delta_frac=sec["delta_frac"],
                       f1_override=sec["f1_override"])


def build_lattice(cfg: dict) -> LatticeEnsembleConfig:
    sec = _need(cfg, "lattice")
    return LatticeEnsembleConfig(
        j_nz=sec["j_nz_hz"], c_coeff=sec["c_coeff_hz"], nu_r=sec["nu_r_hz"],
        n_sites=sec["n_sites"], s_max=sec["s_max"],
        temperature=sec["temperature_k"], coupling_sign=sec["coupling_sign"],
        dressed_weights=sec["dressed_weights"])


def build_pulse(cfg: dict, which: str, drive: DriveConfig,
                species: AtomSpecies) -> PulseConfig:
    sec = _need(cfg, which)
    if sec["bare_g0_hz"] is not None:
        return PulseConfig.from_bare(g0=sec["bare_g0_hz"], drive=drive,
                                     species=species,
                                     detuning=sec["detuning_hz"],
                                     sideband=sec["sideband"],
                                     duration=sec["duration_s"])
    g = sec["g_eff_hz"]
    if sec["duration_s"] is None:
        return PulseConfig.pi_pulse(g_eff=g, detuning=sec["detuning_hz"],
                                    sideband=sec["sideband"])
    return PulseConfig(g_eff=g, detuning=sec["detuning_hz"],
                       duration=sec["duration_s"], sideband=sec["sideband"])


def build_protocol(cfg: dict) -> ProtocolConfig:
    species = build_species(cfg)
    drive = build_drive(cfg)
    lattice = build_lattice(cfg)
    pulse1 = build_pulse(cfg, "pulse1", drive, species)
    pulse2 = build_pulse(cfg, "pulse2", drive, species)
    proto = cfg.get("protocol", _validate_section("protocol", {}))
    return ProtocolConfig(species=species, drive=drive, lattice=lattice,
                          pulse1=pulse1, pulse2=pulse2,
                          wait_offset=proto["wait_offset_s"],
                          wait_periods=proto["wait_periods"],
                          sideband_set=tuple(proto["sideband_set"]))


def _linspace(lo: float, hi: float, n: int, where: str) -> np.ndarray:
    if n < 1:
        raise ConfigError(f"{where} must be at least 1")
    if n == 1:
        return np.array([lo], dtype=float)
    if hi < lo:
        raise ConfigError(f"{where.rsplit('_', 1)[0]} range is reversed")
    return np.linspace(lo, hi, n)


def spectrum_grid(cfg: dict) -> np.ndarray:
    sec = _need(cfg, "spectrum")
    return _linspace(sec["detuning_min_hz"], sec["detuning_max_hz"],
                     sec["points"], "spectrum.points")


def trace_grid(cfg: dict) -> np.ndarray:
    sec = _need(cfg, "trace")
    return _linspace(sec["t_min_s"], sec["t_max_s"], sec["points"],
                     "trace.points")


def scan_axes(cfg: dict) -> list:
    sec = _need(cfg, "scan")
    axes = []
    for axis in sec["axes"]:
        lo_k, hi_k, n_k = _axis_keys(axis)
        axes.append((axis, _linspace(sec[lo_k], sec[hi_k], sec[n_k],
                                     f"scan.{n_k}")))
    return axes
