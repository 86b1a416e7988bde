"""snlab: a numerical laboratory for self-gravitating quantum wave packets
and collapse-model dynamics on periodic lattices."""

__version__ = "0.1.0"

from .diagnostics import DiagnosticsRecord, diagnostics
from .dynamics import EvolutionConfig, evolve, ground_state, step_sn, step_spinor
from .grids import Grid
from .spectral import KernelSpec, kinetic_half_step, kspace_nonlinear_term, potential_from_density
from .states import (DensityMatrix, SpinorWaveFunction, TwoParticleWaveFunction,
                     WaveFunction, gaussian_packet, norm, two_packet_superposition)
from .two_particle import step_two_particle
from .units import CODATA2018, PhysicalConstants, UnitSystem, make_unit_system

__all__ = [
    "__version__", "CODATA2018", "PhysicalConstants", "UnitSystem", "make_unit_system",
    "Grid", "WaveFunction", "SpinorWaveFunction", "TwoParticleWaveFunction",
    "DensityMatrix", "norm", "gaussian_packet", "two_packet_superposition",
    "KernelSpec", "potential_from_density", "kinetic_half_step", "kspace_nonlinear_term",
    "DiagnosticsRecord", "diagnostics",
    "EvolutionConfig", "step_sn", "evolve", "ground_state", "step_spinor",
    "step_two_particle",
]
