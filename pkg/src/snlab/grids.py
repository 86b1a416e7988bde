"""Uniform periodic lattices (1D or 3D) and their conjugate wavenumber lattices.

Coordinates are cell-centred on [-L/2, L/2) with x_j = (j - N/2) h, so the
box centre sits exactly on a lattice site.  Wavenumbers follow the FFT
convention k_j = 2 pi j / (N h) with j in FFT order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["Grid"]


@dataclass(frozen=True)
class Grid:
    dimension: int
    points_per_axis: int
    spacing: float

    def __post_init__(self):
        if self.dimension not in (1, 3):
            raise ValidationError(f"dimension must be 1 or 3, got {self.dimension}")
        n = self.points_per_axis
        if n < 8 or n % 2 != 0:
            raise ValidationError(f"points_per_axis must be even and >= 8, got {n}")
        if self.spacing <= 0:
            raise ValidationError(f"spacing must be positive, got {self.spacing}")

    @property
    def box_length(self):
        return self.points_per_axis * self.spacing

    @property
    def cell_volume(self):
        return self.spacing**self.dimension

    @property
    def shape(self):
        return (self.points_per_axis,) * self.dimension

    @property
    def size(self):
        return self.points_per_axis**self.dimension

    def axis_coordinates(self):
        n = self.points_per_axis
        return self.spacing * (np.arange(n) - n // 2)

    def axis_wavenumbers(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)

    def coordinate_mesh(self):
        """Tuple of per-axis coordinate arrays broadcast over the full grid."""
        x = self.axis_coordinates()
        if self.dimension == 1:
            return (x,)
        return np.meshgrid(x, x, x, indexing="ij", sparse=True)

    def wavenumber_mesh(self):
        k = self.axis_wavenumbers()
        if self.dimension == 1:
            return (k,)
        return np.meshgrid(k, k, k, indexing="ij", sparse=True)

    def k_squared(self):
        """|k|^2 over the full grid, FFT-ordered."""
        ks = self.wavenumber_mesh()
        out = ks[0] ** 2
        for k in ks[1:]:
            out = out + k**2
        return out
