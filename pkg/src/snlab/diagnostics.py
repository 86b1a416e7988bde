"""Observables recorded along an evolution: norm, energy split, centre of
mass, rms width, and (for multi-packet runs) packet positions.

Energies are computed spectrally: kinetic as sum (k^2/2) |psi_k|^2 and the
gravitational part as (1/2) integral Phi rho, i.e. the interaction
functional is counted once per pair.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import fft as sfft

from .errors import ValidationError
from .spectral import KernelSpec, apply_kernel
from .states import norm as state_norm

__all__ = ["DiagnosticsRecord", "diagnostics", "centre_of_mass", "rms_width"]


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    norm: float
    kinetic_energy: float
    gravitational_energy: float
    total_energy: float
    centre_of_mass: tuple
    width: float
    packet_positions: tuple | None = None

    def with_packets(self, positions):
        return replace(self, packet_positions=tuple(positions))


def centre_of_mass(density, grid):
    """Density-weighted mean position, one entry per axis."""
    p = density / (density.sum() * grid.cell_volume)
    mesh = grid.coordinate_mesh()
    h = grid.cell_volume
    return tuple(float(np.sum(np.broadcast_to(x, grid.shape) * p) * h) for x in mesh)


def rms_width(density, grid, com=None):
    """Root-mean-square radius about the centre of mass (summed over axes)."""
    if com is None:
        com = centre_of_mass(density, grid)
    p = density / (density.sum() * grid.cell_volume)
    mesh = grid.coordinate_mesh()
    h = grid.cell_volume
    var = 0.0
    for x, c in zip(mesh, com):
        var += float(np.sum(np.broadcast_to((x - c) ** 2, grid.shape) * p) * h)
    return np.sqrt(var)


def diagnostics(state, unit_system=None, kernel=None, kappa=None, time=0.0):
    """DiagnosticsRecord for a normalized state.

    kappa defaults to the unit system's coupling; evolution loops override
    it (and the kernel) so that recorded energies are the conserved
    quantities of the dynamics actually being run.
    """
    state.require_normalized()
    grid = state.grid
    if kappa is None:
        if unit_system is None:
            raise ValidationError("diagnostics needs either a unit_system or an explicit kappa")
        kappa = unit_system.kappa
    if kernel is None:
        kernel = KernelSpec.default_for(grid)

    psi_k = sfft.fftn(state.amplitudes)
    measure = grid.cell_volume / grid.size
    kinetic = float(np.sum(0.5 * grid.k_squared() * np.abs(psi_k) ** 2) * measure)

    rho = state.density()
    if kappa != 0.0:
        phi = apply_kernel(rho, kernel, kappa, grid)
        grav = float(0.5 * np.sum(phi * rho) * grid.cell_volume)
    else:
        grav = 0.0

    com = centre_of_mass(rho, grid)
    width = rms_width(rho, grid, com)
    return DiagnosticsRecord(
        time=time,
        norm=state_norm(state),
        kinetic_energy=kinetic,
        gravitational_energy=grav,
        total_energy=kinetic + grav,
        centre_of_mass=com,
        width=width,
    )
