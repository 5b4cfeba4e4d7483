"""Thermal ensemble over quasimomentum and radial shells.

The lattice populates the lowest longitudinal band; the transverse motion
is a 2-D oscillator whose shell s = n_x + n_y is (s+1)-fold degenerate.
Boltzmann weights are taken on the drive-dressed band by default and are
normalized to sum to one over the full (s, q) grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import NumericsError
from .floquet import dispersion, effective_f1
from .params import AtomSpecies, DriveConfig, LatticeEnsembleConfig

__all__ = ["ModePoint", "ThermalEnsemble", "build_ensemble",
           "shift_ensemble_energy_reference"]


@dataclass(frozen=True)
class ModePoint:
    """One (shell, quasimomentum) ensemble point."""

    s: int
    q: float
    energy: float      # E/h, Hz
    weight: float
    degeneracy: int


@dataclass(eq=False)
class ThermalEnsemble:
    """Thermal occupation of the (s, q) grid.

    q_grid entries are q_j = -pi + 2 pi j / N for j = 1..N; weights sum to
    one and are ordered with s ascending (rows) and q ascending (columns).
    partition_z is the raw Boltzmann sum relative to the stored energy
    reference (minimum energy subtracted before exponentiation).
    """

    s_levels: np.ndarray
    q_grid: np.ndarray
    energies: np.ndarray
    weights: np.ndarray
    partition_z: float
    lattice: LatticeEnsembleConfig
    drive: DriveConfig
    species: AtomSpecies
    f1: complex

    def iter_points(self) -> Iterator[ModePoint]:
        """Yield points in deterministic (s ascending, q ascending) order."""
        for i, s in enumerate(self.s_levels):
            deg = int(s) + 1
            for j, q in enumerate(self.q_grid):
                yield ModePoint(int(s), float(q), float(self.energies[i, j]),
                                float(self.weights[i, j]), deg)

    def q_marginal(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    def s_marginal(self) -> np.ndarray:
        return self.weights.sum(axis=1)


def _boltzmann_weights(energies: np.ndarray, s_levels: np.ndarray,
                       kbt_freq: float) -> tuple[np.ndarray, float]:
    shifted = energies - energies.min()
    raw = (s_levels[:, None] + 1.0) * np.exp(-shifted / kbt_freq)
    z = float(raw.sum())
    if not np.isfinite(z) or z <= 0.0:
        raise NumericsError(
            "Boltzmann sum underflowed; rescale by subtracting the minimum "
            "energy before exponentiating (energies may be far from their "
            "reference) or reduce s_max"
        )
    return raw / z, z


def build_ensemble(lattice: LatticeEnsembleConfig, drive: DriveConfig,
                   species: AtomSpecies, f1: complex | None = None) -> ThermalEnsemble:
    """Populate the (s, q) grid thermally.

    f1 defaults to the drive's dressed hopping factor. When
    lattice.dressed_weights is False the Boltzmann energies use the bare
    tunneling (f1 = 1) while the returned f1 still reflects the drive.
    """
    if f1 is None:
        f1 = effective_f1(drive, species)
    f1 = complex(f1)
    n = lattice.n_sites
    q_grid = np.linspace(-np.pi + 2.0 * np.pi / n, np.pi, n)
    s_levels = np.arange(lattice.s_max + 1)
    f1_for_weights = f1 if lattice.dressed_weights else 1.0 + 0.0j
    energies = dispersion(q_grid[None, :], s_levels[:, None].astype(float),
                          lattice, f1_for_weights)
    energies = np.ascontiguousarray(energies)
    weights, z = _boltzmann_weights(energies, s_levels.astype(float), lattice.kbt_freq)
    return ThermalEnsemble(
        s_levels=s_levels,
        q_grid=q_grid,
        energies=energies,
        weights=np.ascontiguousarray(weights),
        partition_z=z,
        lattice=lattice,
        drive=drive,
        species=species,
        f1=f1,
    )


def shift_ensemble_energy_reference(ens: ThermalEnsemble) -> ThermalEnsemble:
    """Re-reference energies to their minimum and rebuild the weights.

    Weights are invariant under the shift (to rounding), which is the
    conditioning step protecting the Boltzmann exponentials.
    """
    shifted = ens.energies - ens.energies.min()
    weights, z = _boltzmann_weights(shifted, ens.s_levels.astype(float),
                                    ens.lattice.kbt_freq)
    return ThermalEnsemble(
        s_levels=ens.s_levels,
        q_grid=ens.q_grid,
        energies=shifted,
        weights=np.ascontiguousarray(weights),
        partition_z=z,
        lattice=ens.lattice,
        drive=ens.drive,
        species=ens.species,
        f1=ens.f1,
    )
