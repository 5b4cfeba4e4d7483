"""Command-line entry point: deterministic CSV results plus a JSON sidecar.

Every subcommand resolves its configuration as preset defaults, overlaid by
an optional config file, overlaid by --set assignments, overlaid by the few
dedicated flags. The CSV payload is byte-identical across runs of the same
inputs; only the sidecar's wall-time field varies.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, config as cfgmod
from .ensemble import build_ensemble
from .errors import ConfigError, GridSizeError, SboClockError
from .floquet import hopping_factor, rabi_factor
from .metrology import (FisherQuery, find_optimal_time, fisher_information,
                        fisher_scan, force_freq_from_gravity, gravity_convert)
from .oracles import (TwoLevelSim, evolve_two_level, hopping_coefficient_quad,
                      rabi_coefficient_quad)
from .params import CosineWave
from .spectroscopy import prepare, protocol_pg, rabi_excitation, thermal_spectrum

_SUBCOMMANDS = ("spectrum", "prepare", "sbo", "fisher", "optimize", "gravity",
                "oracle")


def _fmt(value) -> str:
    """Fixed 17-significant-digit decimal text for doubles."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_sidecar(path: str, subcommand: str, cfg: dict, summary: dict,
                   wall_time: float) -> None:
    doc = {
        "subcommand": subcommand,
        "version": __version__,
        "wall_time_s": wall_time,
        "config": cfg,
        "summary": summary,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value)!r}")


def _resolve_config(args) -> dict:
    raw: dict = {}
    if args.preset:
        raw = cfgmod.merge_configs(raw, cfgmod.preset_raw(args.preset))
    if args.config:
        raw = cfgmod.merge_configs(raw, cfgmod.read_raw(args.config))
    if not raw:
        raise ConfigError("no parameters: pass --preset and/or --config")
    if args.set:
        return cfgmod.apply_overrides(raw, args.set)
    return cfgmod.resolve(raw)


def _threads(args, cfg: dict) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("SBO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"SBO_THREADS is not an integer: {env!r}") from exc
    if "scan" in cfg:
        return max(1, cfg["scan"]["threads"])
    return 1


def _run_spectrum(cfg, args):
    species = cfgmod.build_species(cfg)
    drive = cfgmod.build_drive(cfg)
    lattice = cfgmod.build_lattice(cfg)
    pulse1 = cfgmod.build_pulse(cfg, "pulse1", drive, species)
    grid = cfgmod.spectrum_grid(cfg)
    sidebands = tuple(cfg["spectrum"]["sidebands"])
    ens = build_ensemble(lattice, drive, species)
    spec = thermal_spectrum(ens, pulse1, grid, sideband_set=sidebands)
    rows = zip(spec.detunings, spec.values)
    return ("detuning_hz", "p_excited"), rows, spec.metadata


def _run_prepare(cfg, args):
    species = cfgmod.build_species(cfg)
    drive = cfgmod.build_drive(cfg)
    lattice = cfgmod.build_lattice(cfg)
    pulse1 = cfgmod.build_pulse(cfg, "pulse1", drive, species)
    ens = build_ensemble(lattice, drive, species)
    state = prepare(ens, pulse1)
    flat = state.weights.reshape(-1)
    rows = ((pt.s, pt.q, pt.weight, flat[k])
            for k, pt in enumerate(ens.iter_points()))
    summary = {
        "prep_probability": state.prep_probability,
        "sideband": state.sideband,
        "partition_z": ens.partition_z,
    }
    return ("s", "q", "thermal_weight", "prepared_weight"), rows, summary


def _run_sbo(cfg, args):
    if args.wait is not None:
        if args.wait < 0:
            raise ConfigError("--wait must be nonnegative")
        cfg = cfgmod.apply_overrides(
            cfg, [f"protocol.wait_offset_s={args.wait!r}",
                  "protocol.wait_periods=0"])
    proto = cfgmod.build_protocol(cfg)
    if args.mode == "trace":
        sec = cfg.get("trace")
        if sec is None:
            raise ConfigError("missing section [trace]")
        grid = cfgmod.trace_grid(cfg)
        sidebands = proto.sideband_set if sec["sum_sidebands"] else None
        trace = protocol_pg(proto, time_grid=grid, pulse2_sidebands=sidebands)
        return ("t_s", "p_ground"), zip(trace.times, trace.values), trace.metadata
    grid = cfgmod.spectrum_grid(cfg)
    sidebands = tuple(cfg["spectrum"]["sidebands"])
    spec = protocol_pg(proto, delta2_grid=grid, pulse2_sidebands=sidebands)
    return ("delta2_hz", "p_ground"), zip(spec.detunings, spec.values), spec.metadata


def _run_fisher(cfg, args):
    proto = cfgmod.build_protocol(cfg)
    n_atoms = cfg.get("fisher", {}).get("n_atoms", 1.0)
    query = FisherQuery(protocol=proto, n_atoms=n_atoms)
    axes = cfgmod.scan_axes(cfg)
    grid_cap = cfg["scan"]["grid_cap"]
    threads = _threads(args, cfg)
    result = fisher_scan(query, axes, grid_cap=grid_cap, threads=threads)
    names = [name for name, _ in result.axes]
    header = tuple(_axis_column(n) for n in names) + ("fisher",)

    def rows():
        grids = [vals for _, vals in result.axes]
        flat = result.values.reshape(-1)
        for j, f in enumerate(flat):
            idx = np.unravel_index(j, result.values.shape)
            yield tuple(grids[k][idx[k]] for k in range(len(grids))) + (f,)

    drive = proto.drive
    force_freq = drive.n_res * drive.nu_s + drive.delta_nu_s
    summary = {
        "argmax": result.coords(),
        "f_max": result.f_max,
        "crb_hz": result.crb_hz,
        "delta_g_over_g": result.crb_hz / force_freq if force_freq > 0 else None,
        "n_atoms": n_atoms,
        "grid_points": result.metadata["grid_points"],
    }
    return header, rows(), summary


def _axis_column(name: str) -> str:
    return f"{name}_s" if name == "t" else f"{name}_hz"


def _run_optimize(cfg, args):
    proto = cfgmod.build_protocol(cfg)
    n_atoms = cfg.get("fisher", {}).get("n_atoms", 1.0)
    sec = cfg.get("optimize")
    if sec is None:
        raise ConfigError("missing section [optimize]")
    query = FisherQuery(protocol=proto, n_atoms=n_atoms)
    best = find_optimal_time(query, (sec["t_min_s"], sec["t_max_s"]),
                             coarse_points=sec["coarse_points"],
                             refine_rounds=sec["refine_rounds"],
                             refine_points=sec["refine_points"])
    drive = proto.drive
    force_freq = drive.n_res * drive.nu_s + drive.delta_nu_s
    offsets = {}
    for off in sec["report_offsets_s"]:
        t = best.time + off
        f = fisher_information(query, t=t)
        offsets[_fmt(off)] = {
            "t_s": t,
            "fisher": f,
            "crb_hz": None if f <= 0 else 1.0 / math.sqrt(f),
            "delta_g_over_g": None if f <= 0 else
            (1.0 / math.sqrt(f)) / force_freq,
        }
    summary = {
        "t_m_s": best.time,
        "f_max": best.fisher,
        "crb_hz": best.crb_hz,
        "delta_g_over_g": best.crb_hz / force_freq
        if math.isfinite(best.crb_hz) else None,
        "window_s": list(best.window),
        "evaluations": best.evaluations,
        "offsets": offsets,
        "n_atoms": n_atoms,
    }
    rows = zip(best.coarse_times, best.coarse_fisher)
    return ("t_s", "fisher"), rows, summary


def _run_gravity(cfg, args):
    species = cfgmod.build_species(cfg)
    g_in = args.g
    if g_in is None:
        g_in = cfg.get("gravity", {}).get("g_m_per_s2")
    if g_in is not None:
        force_freq = force_freq_from_gravity(species, g_in)
        summary = {
            "direction": "gravity_to_force_freq",
            "g_m_per_s2": g_in,
            "force_freq_hz": force_freq,
            "recoil_freq_hz": species.recoil_freq,
            "recoil_freq_derived_hz": species.derived_recoil_freq(),
        }
        rows = [(g_in, force_freq)]
        return ("g_m_per_s2", "force_freq_hz"), rows, summary
    drive = cfgmod.build_drive(cfg)
    unc = cfg.get("gravity", {}).get("uncertainty_hz")
    res = gravity_convert(species, drive.n_res, drive.nu_s,
                          delta_nu_s=drive.delta_nu_s, uncertainty=unc)
    summary = {
        "direction": "force_freq_to_gravity",
        "force_freq_hz": res.force_freq,
        "g_m_per_s2": res.g_value,
        "rel_uncertainty": res.rel_uncertainty,
    }
    summary.update({k: v for k, v in res.metadata.items()})
    rows = [(res.force_freq, res.g_value,
             res.rel_uncertainty if res.rel_uncertainty is not None
             else float("nan"))]
    return ("force_freq_hz", "g_m_per_s2", "rel_uncertainty"), rows, summary


def _run_oracle(cfg, args):
    species = cfgmod.build_species(cfg)
    drive = cfgmod.build_drive(cfg)
    sec = cfg.get("oracle")
    if sec is None:
        raise ConfigError("missing section [oracle]")
    kind = sec["kind"]
    n_samp = sec["samples_per_period"]
    ts = np.arange(n_samp) / (n_samp * drive.nu_s)
    if kind == "hopping":
        prod = hopping_factor(drive, species, sec["hop"])
        ref = hopping_coefficient_quad(drive.waveform, drive.nu_s, drive.n_res,
                                       species.recoil_freq, hop=sec["hop"],
                                       tol=sec["tol"])
        scale = math.pi / (4.0 * species.recoil_freq)
        phase = sec["hop"] * (scale * drive.waveform.value(ts, drive.nu_s)
                              + 2.0 * math.pi * drive.n_res * drive.nu_s * ts)
        rows = zip(ts, np.cos(phase), np.sin(phase))
        summary = _coefficient_summary(prod, ref)
        return ("t_s", "re_phasor", "im_phasor"), rows, summary
    if kind == "rabi":
        m = sec["sideband"]
        prod = rabi_factor(drive, species, m)
        ref = rabi_coefficient_quad(drive.waveform, drive.nu_s, m,
                                    species.soc_phase, tol=sec["tol"])
        phase = -(species.soc_phase * drive.waveform.integral(ts, drive.nu_s)
                  + 2.0 * math.pi * m * drive.nu_s * ts)
        rows = zip(ts, np.cos(phase), np.sin(phase))
        summary = _coefficient_summary(prod, ref)
        return ("t_s", "re_phasor", "im_phasor"), rows, summary
    # kind == "pulse": direct integration of one pulse against the lineshape
    pulse = cfgmod.build_pulse(cfg, "pulse1", drive, species)
    g0 = pulse.bare_g0 if pulse.bare_g0 is not None else pulse.g_eff
    m = pulse.sideband
    if isinstance(drive.waveform, CosineWave):
        y = species.soc_phase * drive.waveform.amplitude / (2.0 * math.pi * drive.nu_s)
        sim = TwoLevelSim(coupling=g0, detuning=pulse.detuning,
                          duration=pulse.duration, phase_amplitude=-y,
                          drive_freq=drive.nu_s)
    else:
        phi = species.soc_phase

        def phase_fn(t):
            return -phi * float(drive.waveform.integral(t, drive.nu_s))

        sim = TwoLevelSim(coupling=g0, detuning=pulse.detuning,
                          duration=pulse.duration, phase_fn=phase_fn,
                          drive_freq=drive.nu_s)
    trace = evolve_two_level(sim)
    g_eff = g0 * abs(rabi_factor(drive, species, m))
    predicted = rabi_excitation(pulse.detuning + m * drive.nu_s, g_eff,
                                pulse.duration)
    summary = {
        "final_population": trace.final,
        "norm": trace.norm,
        "sideband": m,
        "g_eff_hz": g_eff,
        "lineshape_prediction": float(predicted),
        "abs_difference": abs(trace.final - float(predicted)),
    }
    return ("t_s", "p_excited"), zip(trace.times, trace.populations), summary


def _coefficient_summary(prod: complex, ref: complex) -> dict:
    return {
        "production_re": prod.real,
        "production_im": prod.imag,
        "oracle_re": ref.real,
        "oracle_im": ref.imag,
        "abs_difference": abs(prod - ref),
    }


_HANDLERS = {
    "spectrum": _run_spectrum,
    "prepare": _run_prepare,
    "sbo": _run_sbo,
    "fisher": _run_fisher,
    "optimize": _run_optimize,
    "gravity": _run_gravity,
    "oracle": _run_oracle,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbo-clock",
        description="Driven-lattice clock spectroscopy and gravimetry tool")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--preset", help="named built-in parameter set")
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--set", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--output", default=f"{name}_out",
                       help="output base path (BASE.csv and BASE.json)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for grid scans (beats SBO_THREADS)")
        if name == "sbo":
            p.add_argument("--mode", choices=("trace", "spectrum"),
                           default="trace")
            p.add_argument("--wait", type=float, default=None,
                           help="absolute wait in seconds before pulse 2")
        if name == "gravity":
            p.add_argument("--g", type=float, default=None,
                           help="local gravity in m/s^2 to convert")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = _resolve_config(args)
        header, rows, summary = _HANDLERS[args.subcommand](cfg, args)
        _write_csv(f"{args.output}.csv", header, rows)
        _write_sidecar(f"{args.output}.json", args.subcommand, cfg, summary,
                       time.perf_counter() - started)
    except Exception as exc:  # noqa: BLE001  single choke point for exit codes
        code = _exit_code(exc)
        payload = {"error": type(exc).__name__, "message": str(exc),
                   "exit_code": code}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return code
    print(f"{args.output}.csv")
    return 0


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, GridSizeError):
        return 3
    if isinstance(exc, ConfigError):
        return 2
    if isinstance(exc, SboClockError):
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
