"""FFT-based operators: kinetic propagation, the Newtonian potential solve,
and the k-space form of the gravitational nonlinearity.

Conventions (fixed so goldens are bit-stable):
  * forward FFT unnormalized, inverse carries 1/N^d (numpy/scipy default);
  * the k = 0 mode of singular kernels is set to zero -- on a periodic box
    the potential is defined up to a constant, which only shifts a global
    phase;
  * 3D kernel symbol 4 pi / k^2; optionally spherically truncated at
    R_c = box/2, symbol (4 pi / k^2)(1 - cos(k R_c)), which reproduces the
    free-space potential exactly for sources contained in a ball of radius
    R_c/2 (periodic images are cut away by the truncation);
  * 1D runs use the softened kernel 1/sqrt(x^2 + eps^2) whose continuum
    transform is 2 K0(|k| eps).

The truncated variant exists because the plain zero-mode convention leaves
a constant image offset of order 2.84/box in the potential, far too large
for quantitative energy comparisons against free-space references.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.special import k0 as bessel_k0

from .errors import ContractViolationError, ValidationError
from .states import WaveFunction

__all__ = ["KernelSpec", "kernel_symbol", "potential_from_density",
           "kinetic_half_step", "kspace_nonlinear_term"]

NEWTONIAN_3D = "newtonian_3d"
SOFTENED_1D = "softened_1d"
GAUSSIAN_SMEARED_3D = "gaussian_smeared_3d"


@dataclass(frozen=True)
class KernelSpec:
    """Which interaction kernel the potential solve uses.

    kind        one of newtonian_3d | softened_1d | gaussian_smeared_3d
    softening   eps > 0 for softened_1d
    smearing    R0 > 0 for gaussian_smeared_3d
    truncated   spherically truncate the 3D kernel at half the box length
    """

    kind: str
    softening: float | None = None
    smearing: float | None = None
    truncated: bool = False

    def __post_init__(self):
        if self.kind not in (NEWTONIAN_3D, SOFTENED_1D, GAUSSIAN_SMEARED_3D):
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == SOFTENED_1D and (self.softening is None or self.softening <= 0):
            raise ValidationError("softened_1d requires softening > 0")
        if self.kind == GAUSSIAN_SMEARED_3D and (self.smearing is None or self.smearing <= 0):
            raise ValidationError("gaussian_smeared_3d requires smearing > 0")

    @property
    def dimension(self):
        return 1 if self.kind == SOFTENED_1D else 3

    @classmethod
    def newtonian(cls, truncated=False):
        return cls(NEWTONIAN_3D, truncated=truncated)

    @classmethod
    def softened(cls, epsilon):
        return cls(SOFTENED_1D, softening=epsilon)

    @classmethod
    def smeared(cls, r0, truncated=False):
        return cls(GAUSSIAN_SMEARED_3D, smearing=r0, truncated=truncated)

    @classmethod
    def default_for(cls, grid):
        """Softened 1/sqrt(x^2 + (2h)^2) in 1D, truncated Newtonian in 3D."""
        if grid.dimension == 1:
            return cls.softened(2.0 * grid.spacing)
        return cls.newtonian(truncated=True)


def kernel_symbol(kernel, grid):
    """k-space symbol of the positive kernel (the transform of 1/|r| and friends)."""
    if kernel.dimension != grid.dimension:
        raise ValidationError(
            f"kernel {kernel.kind} is {kernel.dimension}D but grid is {grid.dimension}D")
    if kernel.kind == SOFTENED_1D:
        k = grid.axis_wavenumbers()
        sym = np.zeros_like(k)
        nz = k != 0.0
        sym[nz] = 2.0 * bessel_k0(np.abs(k[nz]) * kernel.softening)
        return sym

    k2 = grid.k_squared()
    with np.errstate(divide="ignore", invalid="ignore"):
        sym = 4.0 * np.pi / k2
        if kernel.truncated:
            rc = 0.5 * grid.box_length
            sym = sym * (1.0 - np.cos(np.sqrt(k2) * rc))
            sym.flat[0] = 2.0 * np.pi * rc**2  # k -> 0 limit of the truncated symbol
        else:
            sym.flat[0] = 0.0
    if kernel.kind == GAUSSIAN_SMEARED_3D:
        sym = sym * np.exp(-2.0 * k2 * kernel.smearing**2)  # squared Gaussian smearing
    return sym


def apply_kernel(density, kernel, kappa, grid):
    """Phi = -kappa * (kernel * density), no normalization checks.

    Internal workhorse for callers whose densities legitimately integrate
    to something other than 1 (component densities, two-particle sums).
    """
    sym = kernel_symbol(kernel, grid)
    sym_r = sym[..., : grid.points_per_axis // 2 + 1]
    out = sfft.irfftn(sfft.rfftn(density) * sym_r, s=grid.shape)
    return -kappa * out


def potential_from_density(density, kernel, kappa, grid):
    """Newtonian potential Phi(r) = -kappa * integral density(r') K(r - r') dr'.

    `density` must be a nonnegative field of discrete integral 1 (within 1e-6).
    """
    density = np.asarray(density, dtype=float)
    if density.shape != grid.shape:
        raise ValidationError("density shape does not match grid")
    if kernel.dimension != grid.dimension:
        raise ValidationError(
            f"kernel {kernel.kind} is {kernel.dimension}D but grid is {grid.dimension}D")
    if density.min() < 0:
        raise ContractViolationError("density must be nonnegative")
    total = float(density.sum() * grid.cell_volume)
    if abs(total - 1.0) > 1e-6:
        raise ContractViolationError(f"density integral {total} deviates from 1 beyond 1e-6")
    return apply_kernel(density, kernel, kappa, grid)


def kinetic_factor(grid, dt, half=True):
    """Multiplier exp(-i k^2 dt / 4) of a kinetic half step (dt may be complex:
    imaginary-time propagation passes dt = -i dtau)."""
    scale = 0.25 if half else 0.5
    return np.exp(-1j * grid.k_squared() * (scale * dt))

def kinetic_half_step(state, dt):
    """Half of a kinetic step: amplitudes multiplied in k-space by exp(-i k^2 dt/4)."""
    phases = kinetic_factor(state.grid, dt)
    out = sfft.ifftn(sfft.fftn(state.amplitudes) * phases)
    return WaveFunction(state.grid, out)


def kspace_nonlinear_term(state, kappa):
    """Gravitational term Phi[|psi|^2] * psi assembled from the k-space mode sum.

    In operator language the nonlinearity is (1/2 pi^2) integral d^3k of
    <L(k)^dag> L(k) psi with L(k) = exp(i k.r)/k; on the lattice the
    integral becomes a sum with measure (2 pi / box)^3 and the mode
    amplitude <L(k)^dag> = rho_hat(k)/k with rho_hat(k) = FFT(rho) h^3.
    After simplification the prefactor -kappa/(2 pi^2) times that measure
    equals the -kappa 4 pi / k^2 Poisson symbol, so this route must agree
    with potential_from_density to rounding; it is kept separate because
    the collapse-model drift terms are built from the same mode sum.
    """
    grid = state.grid
    if grid.dimension != 3:
        raise ValidationError("the k-space operator form is defined for 3D grids")
    state.require_normalized()
    if kappa == 0.0:
        return np.zeros(grid.shape, dtype=np.complex128)
    rho = state.density()
    k2 = grid.k_squared()
    rho_hat = sfft.fftn(rho) * grid.cell_volume      # continuum Fourier coefficients
    with np.errstate(divide="ignore", invalid="ignore"):
        mode_sum = rho_hat / k2                       # <L^dag(k)> * (L(k) radial part)
    mode_sum.flat[0] = 0.0                            # 1/k operator excludes k = 0
    dk = 2.0 * np.pi / grid.box_length
    field = sfft.ifftn(mode_sum) * grid.size * dk**3  # sum_k e^{ikx} (...) * measure
    phi = -(kappa / (2.0 * np.pi**2)) * field
    return phi * state.amplitudes
