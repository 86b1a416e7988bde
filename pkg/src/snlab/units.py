"""Physical constants and the SI <-> internal unit mapping.

Internal dynamics are dimensionless with hbar = m = 1: choosing a mass m
and a length scale L fixes the time unit T = m L^2 / hbar and collapses
the gravitational self-coupling into the single number

    kappa = G m^3 L / hbar^2.

kappa = 1 when (m, L) are the Planck mass and Planck length.  Working in
these units avoids the catastrophic float scales of SI gravity
(G m^2 ~ 1e-60 for nanogram masses).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ValidationError

__all__ = ["PhysicalConstants", "UnitSystem", "CODATA2018", "make_unit_system"]


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA-2018 values; Planck scales are derived from the stored G, hbar, c."""

    G: float = 6.67430e-11            # m^3 kg^-1 s^-2
    hbar: float = 1.054571817e-34     # J s
    c: float = 2.99792458e8           # m s^-1 (exact)
    kB: float = 1.380649e-23          # J K^-1 (exact)
    atomic_mass_unit: float = 1.66053906660e-27  # kg
    planck_mass: float = field(init=False)
    planck_length: float = field(init=False)

    def __post_init__(self):
        for name in ("G", "hbar", "c", "kB", "atomic_mass_unit"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"constant {name} must be positive")
        object.__setattr__(self, "planck_mass", math.sqrt(self.hbar * self.c / self.G))
        object.__setattr__(self, "planck_length", math.sqrt(self.hbar * self.G / self.c**3))


CODATA2018 = PhysicalConstants()


@dataclass(frozen=True)
class UnitSystem:
    """Mapping between SI quantities and the dimensionless internal units."""

    length_scale: float   # m
    mass: float           # kg
    time_scale: float     # s, = mass * length_scale^2 / hbar
    kappa: float          # dimensionless, = G * mass^3 * length_scale / hbar^2
    constants: PhysicalConstants = CODATA2018

    def __post_init__(self):
        if self.length_scale <= 0 or self.mass <= 0:
            raise ValidationError("length_scale and mass must be positive")
        c = self.constants
        t = self.mass * self.length_scale**2 / c.hbar
        k = c.G * self.mass**3 * self.length_scale / c.hbar**2
        if abs(t - self.time_scale) > 1e-12 * t or abs(k - self.kappa) > 1e-12 * max(k, 1e-300):
            raise ValidationError("time_scale/kappa inconsistent with (length_scale, mass)")

    # SI -> internal
    def length_to_internal(self, x_m):
        return x_m / self.length_scale

    def time_to_internal(self, t_s):
        return t_s / self.time_scale

    def wavenumber_to_internal(self, k_per_m):
        return k_per_m * self.length_scale

    # internal -> SI
    def length_to_si(self, x):
        return x * self.length_scale

    def time_to_si(self, t):
        return t * self.time_scale

    def energy_to_si(self, e):
        # internal energy unit is hbar / time_scale
        return e * self.constants.hbar / self.time_scale


def make_unit_system(mass_si, length_si, constants=CODATA2018):
    """Build the internal unit system for a particle of mass `mass_si` (kg)
    using `length_si` (m) as the unit of length."""
    if mass_si <= 0:
        raise ValidationError(f"mass_si must be positive, got {mass_si}")
    if length_si <= 0:
        raise ValidationError(f"length_si must be positive, got {length_si}")
    time_scale = mass_si * length_si**2 / constants.hbar
    kappa = constants.G * mass_si**3 * length_si / constants.hbar**2
    return UnitSystem(length_scale=length_si, mass=mass_si, time_scale=time_scale,
                      kappa=kappa, constants=constants)
