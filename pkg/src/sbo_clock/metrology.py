"""Fisher-information analysis of the SBO protocol and gravity conversion.

The protocol estimates the SBO rate delta_nu_s from the ground-return
probability P_g of N_a * P_e surviving atoms, each a Bernoulli trial. The
per-shot Fisher information about theta = delta_nu_s is

  F = N_a P_e (dP_g/dtheta)^2 / (P_g (1 - P_g)),

with dP_g/dtheta = dP_g/d(delta q) * 2 pi t via the drift of the slice.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .ensemble import ThermalEnsemble
from .errors import ConfigError, GridSizeError
from .params import AtomSpecies, PulseConfig
from .spectroscopy import ProtocolConfig, ProtocolEvaluator

__all__ = [
    "FisherQuery",
    "FisherScanResult",
    "OptimalTime",
    "GravityResult",
    "fisher_information",
    "fisher_scan",
    "find_optimal_time",
    "gravity_convert",
    "force_freq_from_gravity",
    "endpoint_accuracy",
]

_TWO_PI = 2.0 * math.pi
_AXIS_NAMES = ("delta1", "delta2", "g1", "g2", "t")
_VAR_FLOOR = 1e-12
_FLAT_RESPONSE = 1e-9


@dataclass(frozen=True)
class FisherQuery:
    """Protocol plus atom number for information estimates."""

    protocol: ProtocolConfig
    n_atoms: float = 1.0

    def __post_init__(self) -> None:
        if self.n_atoms <= 0:
            raise ConfigError("fisher.n_atoms must be positive")


def _fisher_from_response(n_atoms: float, pe: float, pg: float,
                          dpg_dtheta: float) -> float:
    var = pg * (1.0 - pg)
    if var < _VAR_FLOOR:
        if abs(dpg_dtheta) < _FLAT_RESPONSE:
            return 0.0
        warnings.warn(
            "P_g pinned at 0 or 1 while still responding; flooring the "
            "binomial variance",
            RuntimeWarning,
            stacklevel=3,
        )
        var = _VAR_FLOOR
    return n_atoms * pe * dpg_dtheta * dpg_dtheta / var


def fisher_information(query: FisherQuery, ensemble: ThermalEnsemble | None = None,
                       t: float | None = None,
                       pulse2_sidebands=None) -> float:
    """Fisher information about delta_nu_s for one protocol setting.

    t overrides the configured wait with an absolute wait in seconds
    (SBO phase delta_nu_s * t); None uses the protocol's wait fields.
    """
    ev = ProtocolEvaluator(query.protocol, ensemble)
    return _fisher_at(ev, query.n_atoms, t=t, sidebands2=pulse2_sidebands)


def _fisher_at(ev: ProtocolEvaluator, n_atoms: float, t: float | None = None,
               delta1: float | None = None, delta2: float | None = None,
               g1: float | None = None, g2: float | None = None,
               sidebands2=None) -> float:
    proto = ev.protocol
    if t is None:
        t_eval = proto.wait_time
        cycles = proto.sbo_cycles
    else:
        t_eval = float(t)
        cycles = proto.drive.delta_nu_s * t_eval
    pulse1 = _override_pulse(proto.pulse1, g1, delta1)
    pulse2 = _override_pulse(proto.pulse2, g2, delta2)
    pe, pg, dpg_dq = ev.response(cycles, delta2=pulse2.detuning, pulse1=pulse1,
                                 pulse2=pulse2, sidebands2=sidebands2,
                                 with_derivative=True)
    dpg_dtheta = dpg_dq * _TWO_PI * t_eval
    return _fisher_from_response(n_atoms, pe, pg, dpg_dtheta)


def _override_pulse(base: PulseConfig, g: float | None,
                    detuning: float | None) -> PulseConfig:
    """Pulse with replaced coupling and/or detuning.

    A replaced coupling keeps the pi-pulse area (duration = 0.5/g) and drops
    bare_g0: a scanned g is the effective coupling of the pulse's own
    sideband, not a rescaled bare drive.
    """
    if g is None and detuning is None:
        return base
    if g is not None:
        if g <= 0:
            raise ConfigError("scanned pulse coupling must be positive")
        return PulseConfig(
            g_eff=float(g),
            detuning=float(detuning) if detuning is not None else base.detuning,
            duration=0.5 / float(g),
            sideband=base.sideband,
        )
    return replace(base, detuning=float(detuning))


@dataclass(eq=False)
class FisherScanResult:
    """Fisher information on a dense grid of protocol settings.

    axes is the ordered list of (name, values); values has the corresponding
    shape (row-major, first axis slowest).
    """

    axes: list
    values: np.ndarray
    argmax: tuple
    f_max: float
    crb_hz: float
    metadata: dict = field(default_factory=dict)

    def coords(self, idx=None) -> dict:
        """Axis coordinates of a grid index (default: the maximum)."""
        if idx is None:
            idx = self.argmax
        return {name: float(vals[i]) for (name, vals), i in zip(self.axes, idx)}


def fisher_scan(query: FisherQuery, axes, grid_cap: int = 10_000_000,
                threads: int = 1,
                ensemble: ThermalEnsemble | None = None) -> FisherScanResult:
    """Evaluate the Fisher information on an outer-product grid.

    axes: ordered mapping or sequence of (name, values) with names among
    delta1, delta2 (pulse detunings, Hz), g1, g2 (effective couplings, Hz;
    pulses stay pi pulses), t (absolute wait, s). Grids larger than
    grid_cap points are refused.
    """
    if isinstance(axes, dict):
        axes = list(axes.items())
    axes = [(str(name), np.asarray(vals, dtype=float)) for name, vals in axes]
    if not axes:
        raise ConfigError("fisher_scan needs at least one axis")
    seen = set()
    for name, vals in axes:
        if name not in _AXIS_NAMES:
            raise ConfigError(
                f"unknown scan axis '{name}'; valid: {', '.join(_AXIS_NAMES)}")
        if name in seen:
            raise ConfigError(f"duplicate scan axis '{name}'")
        seen.add(name)
        if vals.ndim != 1 or vals.size == 0:
            raise ConfigError(f"scan axis '{name}' must be a nonempty 1-d grid")
    shape = tuple(v.size for _, v in axes)
    total = int(np.prod(shape))
    if total > grid_cap:
        raise GridSizeError(
            f"scan grid of {total} points exceeds grid_cap = {grid_cap}")

    ev = ProtocolEvaluator(query.protocol, ensemble)
    names = [name for name, _ in axes]
    grids = [vals for _, vals in axes]
    pos = {name: k for k, name in enumerate(names)}

    def point_kwargs(idx):
        kw = {}
        for name, k in pos.items():
            kw[name] = float(grids[k][idx[k]])
        return kw

    # warm the preparation cache so threaded evaluation only reads it
    g1_vals = grids[pos["g1"]] if "g1" in pos else [None]
    d1_vals = grids[pos["delta1"]] if "delta1" in pos else [None]
    for g1 in g1_vals:
        for d1 in d1_vals:
            ev.prepared(_override_pulse(query.protocol.pulse1,
                                        None if g1 is None else float(g1),
                                        None if d1 is None else float(d1)))

    flat = np.empty(total, dtype=float)

    def run_range(lo: int, hi: int) -> None:
        for j in range(lo, hi):
            idx = np.unravel_index(j, shape)
            flat[j] = _fisher_at(ev, query.n_atoms, **point_kwargs(idx))

    threads = max(1, int(threads))
    if threads == 1 or total < 4 * threads:
        run_range(0, total)
    else:
        bounds = np.linspace(0, total, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(run_range, int(lo), int(hi))
                    for lo, hi in zip(bounds[:-1], bounds[1:])]
            for f in futs:
                f.result()

    values = flat.reshape(shape)
    best = int(np.argmax(flat))
    argmax = tuple(int(i) for i in np.unravel_index(best, shape))
    f_max = float(flat[best])
    crb = float("inf") if f_max <= 0 else 1.0 / math.sqrt(f_max)
    meta = {"n_atoms": query.n_atoms, "threads": threads, "grid_points": total}
    return FisherScanResult(axes=axes, values=values, argmax=argmax,
                            f_max=f_max, crb_hz=crb, metadata=meta)


@dataclass(frozen=True)
class OptimalTime:
    """Best wait time found in a window, with the information there.

    coarse_times/coarse_fisher hold the first sweep for inspection; the
    refinement rounds are not recorded.
    """

    time: float
    fisher: float
    crb_hz: float
    window: tuple
    evaluations: int
    coarse_times: np.ndarray
    coarse_fisher: np.ndarray


def find_optimal_time(query: FisherQuery, window, coarse_points: int = 512,
                      refine_rounds: int = 4, refine_points: int = 65,
                      ensemble: ThermalEnsemble | None = None) -> OptimalTime:
    """Deterministic grid-zoom search for the wait time maximizing F.

    The coarse grid must resolve the SBO oscillation (period 1/delta_nu_s);
    each refinement round re-grids one coarse cell around the running best.
    Ties take the earliest time.
    """
    t_lo, t_hi = float(window[0]), float(window[1])
    if not (0 <= t_lo < t_hi):
        raise ConfigError("optimal-time window must satisfy 0 <= lo < hi")
    if coarse_points < 8 or refine_points < 5:
        raise ConfigError("optimal-time search grids are too small")
    ev = ProtocolEvaluator(query.protocol, ensemble)
    n_eval = 0

    def sweep(lo: float, hi: float, npts: int):
        nonlocal n_eval
        ts = np.linspace(lo, hi, npts)
        fs = np.empty_like(ts)
        for i, t in enumerate(ts):
            fs[i] = _fisher_at(ev, query.n_atoms, t=float(t))
        n_eval += npts
        k = int(np.argmax(fs))  # first index wins ties, earliest time
        return ts, fs, k

    ts, fs, k = sweep(t_lo, t_hi, coarse_points)
    coarse_times, coarse_fisher = ts, fs
    best_t, best_f = float(ts[k]), float(fs[k])
    step = (t_hi - t_lo) / (coarse_points - 1)
    for _ in range(refine_rounds):
        lo = max(t_lo, best_t - step)
        hi = min(t_hi, best_t + step)
        ts, fs, k = sweep(lo, hi, refine_points)
        if float(fs[k]) > best_f:
            best_t, best_f = float(ts[k]), float(fs[k])
        step = (hi - lo) / (refine_points - 1)
    crb = float("inf") if best_f <= 0 else 1.0 / math.sqrt(best_f)
    return OptimalTime(time=best_t, fisher=best_f, crb_hz=crb,
                       window=(t_lo, t_hi), evaluations=n_eval,
                       coarse_times=coarse_times, coarse_fisher=coarse_fisher)


@dataclass(frozen=True)
class GravityResult:
    """Forced-frequency and gravity values implied by a drive setting."""

    force_freq: float
    g_value: float
    rel_uncertainty: float | None
    metadata: dict


def force_freq_from_gravity(species: AtomSpecies, g_local: float) -> float:
    """Bloch frequency (g / lambda_lattice) / (4 recoil_freq) in Hz."""
    return (g_local / species.lambda_lattice) / (4.0 * species.recoil_freq)


def gravity_convert(species: AtomSpecies, n_res: int, nu_s: float,
                    delta_nu_s: float = 0.0,
                    uncertainty: float | None = None) -> GravityResult:
    """Convert the resonance condition (n + Delta) nu_s to local gravity.

    The drive satisfies n nu_s + delta_nu_s = force_freq; gravity follows
    from force_freq = (g / lambda_lattice) / (4 recoil_freq). The metadata
    reports the same conversion under the mass-derived recoil frequency,
    since the operating value is often a rounded override.
    """
    if nu_s <= 0:
        raise ConfigError("gravity conversion needs nu_s > 0")
    force_freq = n_res * nu_s + delta_nu_s
    g_value = force_freq * species.lambda_lattice * 4.0 * species.recoil_freq
    rel = None if uncertainty is None else abs(uncertainty) / force_freq
    derived_fr = species.derived_recoil_freq()
    meta = {
        "recoil_freq": species.recoil_freq,
        "recoil_freq_derived": derived_fr,
        "g_value_derived_recoil": force_freq * species.lambda_lattice * 4.0 * derived_fr,
        "n_res": int(n_res),
        "nu_s": nu_s,
        "delta_nu_s": delta_nu_s,
    }
    return GravityResult(force_freq=force_freq, g_value=g_value,
                         rel_uncertainty=rel, metadata=meta)


def endpoint_accuracy(query: FisherQuery, t: float | None = None,
                      ensemble: ThermalEnsemble | None = None) -> float:
    """Projected fractional gravity uncertainty delta g / g of one shot.

    Cramer-Rao bound on delta_nu_s divided by the forced frequency
    (n + Delta) nu_s.
    """
    f = fisher_information(query, ensemble=ensemble, t=t)
    if f <= 0:
        return float("inf")
    drive = query.protocol.drive
    force_freq = drive.n_res * drive.nu_s + drive.delta_nu_s
    return (1.0 / math.sqrt(f)) / force_freq
