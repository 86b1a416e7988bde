"""State containers: scalar, spinor and two-particle wave functions, and
position-basis density matrices for open-system evolution.

All amplitude data is discretized on a Grid with the convention that the
discrete norm sum(|psi|^2) * spacing^d equals 1 for physical states.
Instances are treated as immutable after construction: stepping code
always returns new objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, ValidationError
from .grids import Grid

__all__ = [
    "WaveFunction", "SpinorWaveFunction", "TwoParticleWaveFunction",
    "DensityMatrix", "norm", "gaussian_packet", "two_packet_superposition",
]

NORM_TOL = 1e-9


def _field_norm(amplitudes, measure):
    return float(np.sum(np.abs(amplitudes) ** 2) * measure)


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid
    amplitudes: np.ndarray  # complex, shape grid.shape

    def __post_init__(self):
        if self.amplitudes.shape != self.grid.shape:
            raise ValidationError(
                f"amplitude shape {self.amplitudes.shape} does not match grid {self.grid.shape}")

    @classmethod
    def normalized(cls, grid, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        n = _field_norm(amplitudes, grid.cell_volume)
        if n == 0:
            raise ValidationError("cannot normalize a zero field")
        return cls(grid, amplitudes / np.sqrt(n))

    def density(self):
        return np.abs(self.amplitudes) ** 2

    def require_normalized(self, tol=1e-6):
        n = norm(self)
        if abs(n - 1.0) > tol:
            raise ContractViolationError(f"state norm {n} deviates from 1 by more than {tol}")
        return n


def norm(state):
    """Discrete norm sum(|psi|^2) * spacing^dimension (quadratic in the amplitudes)."""
    return _field_norm(state.amplitudes, state.grid.cell_volume)


@dataclass(frozen=True)
class SpinorWaveFunction:
    """Two-component spin-1/2 state; the combined norm of both components is 1."""

    grid: Grid
    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        for comp in (self.plus, self.minus):
            if comp.shape != self.grid.shape:
                raise ValidationError("component shape does not match grid")

    @classmethod
    def normalized(cls, grid, plus, minus):
        plus = np.asarray(plus, dtype=np.complex128)
        minus = np.asarray(minus, dtype=np.complex128)
        total = _field_norm(plus, grid.cell_volume) + _field_norm(minus, grid.cell_volume)
        if total == 0:
            raise ValidationError("cannot normalize a zero spinor")
        s = np.sqrt(total)
        return cls(grid, plus / s, minus / s)

    def total_norm(self):
        v = self.grid.cell_volume
        return _field_norm(self.plus, v) + _field_norm(self.minus, v)

    def component_weights(self):
        v = self.grid.cell_volume
        return _field_norm(self.plus, v), _field_norm(self.minus, v)

    def total_density(self):
        return np.abs(self.plus) ** 2 + np.abs(self.minus) ** 2


@dataclass(frozen=True)
class TwoParticleWaveFunction:
    """Two distinguishable particles on a shared 1D grid; amplitudes indexed (x1, x2)."""

    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.grid.dimension != 1:
            raise ValidationError("two-particle states require a 1D grid")
        n = self.grid.points_per_axis
        if self.amplitudes.shape != (n, n):
            raise ValidationError("two-particle amplitudes must have shape (N, N)")

    @classmethod
    def normalized(cls, grid, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        n = _field_norm(amplitudes, grid.spacing**2)
        if n == 0:
            raise ValidationError("cannot normalize a zero field")
        return cls(grid, amplitudes / np.sqrt(n))

    def total_norm(self):
        return _field_norm(self.amplitudes, self.grid.spacing**2)

    def density(self):
        return np.abs(self.amplitudes) ** 2

    def marginal_densities(self):
        """Single-particle position densities (rho_1(x), rho_2(x)), each of integral 1."""
        p = self.density()
        h = self.grid.spacing
        return p.sum(axis=1) * h, p.sum(axis=0) * h


@dataclass(frozen=True)
class DensityMatrix:
    """Position-basis density matrix on a small 1D grid (<= 64 sites).

    Matrix elements carry no cell-volume weight: trace(matrix) = 1.
    """

    grid: Grid
    matrix: np.ndarray

    HERMITICITY_TOL = 1e-10
    TRACE_TOL = 1e-9
    POSITIVITY_TOL = 1e-8

    def __post_init__(self):
        if self.grid.dimension != 1:
            raise ValidationError("density matrices are defined on 1D grids")
        n = self.grid.points_per_axis
        if n > 64:
            raise ValidationError(f"density-matrix grid limited to 64 sites, got {n}")
        if self.matrix.shape != (n, n):
            raise ValidationError("matrix shape does not match grid")

    @classmethod
    def validated(cls, grid, matrix):
        matrix = np.asarray(matrix, dtype=np.complex128)
        rho = cls(grid, matrix)
        herm = np.max(np.abs(matrix - matrix.conj().T))
        if herm > cls.HERMITICITY_TOL:
            raise ContractViolationError(f"density matrix not Hermitian (deviation {herm:.3e})")
        tr = np.trace(matrix).real
        if abs(tr - 1.0) > cls.TRACE_TOL:
            raise ContractViolationError(f"density matrix trace {tr} deviates from 1")
        lo = float(np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T)).min())
        if lo < -cls.POSITIVITY_TOL:
            raise ContractViolationError(f"density matrix has eigenvalue {lo:.3e} < -{cls.POSITIVITY_TOL}")
        return rho

    @classmethod
    def from_state(cls, state):
        """Pure-state projector |psi><psi| scaled to unit trace."""
        v = state.amplitudes.ravel()
        m = np.outer(v, v.conj())
        return cls.validated(state.grid, m / np.trace(m).real)

    def purity(self):
        return float(np.trace(self.matrix @ self.matrix).real)


def gaussian_packet(grid, width, centre=0.0, momentum=0.0):
    """Normalized isotropic Gaussian, |psi|^2 of rms width `width` per axis,
    optionally boosted by a plane-wave phase along the first axis."""
    if width <= 0:
        raise ValidationError("width must be positive")
    centre = np.broadcast_to(np.asarray(centre, dtype=float), (grid.dimension,))
    mesh = grid.coordinate_mesh()
    r2 = sum((x - c) ** 2 for x, c in zip(mesh, centre))
    psi = np.exp(-r2 / (4.0 * width**2)).astype(np.complex128)
    if momentum != 0.0:
        psi = psi * np.exp(1j * momentum * np.broadcast_to(mesh[0], grid.shape))
    psi = np.broadcast_to(psi, grid.shape)
    return WaveFunction.normalized(grid, np.array(psi))


def two_packet_superposition(grid, width, separation, weights=(0.5, 0.5)):
    """Symmetric superposition of two Gaussians centred at +-separation/2
    along the first axis; `weights` are the probability weights."""
    if separation <= 0:
        raise ValidationError("separation must be positive")
    mesh = grid.coordinate_mesh()
    x = mesh[0]
    r2_rest = sum(xi**2 for xi in mesh[1:]) if grid.dimension > 1 else 0.0
    a = 0.5 * separation
    left = np.exp(-((x + a) ** 2 + r2_rest) / (4.0 * width**2))
    right = np.exp(-((x - a) ** 2 + r2_rest) / (4.0 * width**2))
    wl, wr = weights
    psi = np.sqrt(wl) * left + np.sqrt(wr) * right
    return WaveFunction.normalized(grid, np.broadcast_to(psi.astype(np.complex128), grid.shape).copy())
