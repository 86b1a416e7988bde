import math

import numpy as np
import pytest
from scipy import fft as sfft
from scipy.special import erf, k0

from snlab import Grid, KernelSpec, WaveFunction, gaussian_packet, norm
from snlab.errors import ContractViolationError, ValidationError
from snlab.spectral import (kernel_symbol, kinetic_half_step,
                            kspace_nonlinear_term, potential_from_density)

import oracles


@pytest.fixture(scope="module")
def grid3():
    return Grid(dimension=3, points_per_axis=48, spacing=0.4)


def test_uniform_density_gives_zero_potential():
    grid = Grid(dimension=3, points_per_axis=16, spacing=0.5)
    rho = np.full(grid.shape, 1.0 / (grid.box_length**3))
    phi = potential_from_density(rho, KernelSpec.newtonian(), kappa=1.3, grid=grid)
    assert np.max(np.abs(phi)) < 1e-14


def test_linearity():
    grid = Grid(dimension=3, points_per_axis=16, spacing=0.5)
    rho_a = gaussian_packet(grid, width=0.8).density()
    rho_b = gaussian_packet(grid, width=1.2, centre=(0.7, 0.0, 0.0)).density()
    kern = KernelSpec.newtonian()
    phi_a = potential_from_density(rho_a, kern, 1.0, grid)
    phi_b = potential_from_density(rho_b, kern, 1.0, grid)
    phi_mix = potential_from_density(0.5 * (rho_a + rho_b), kern, 1.0, grid)
    assert np.allclose(phi_mix, 0.5 * (phi_a + phi_b), atol=1e-13)


def test_gaussian_potential_matches_erf_law(grid3):
    """Free-space oracle: a normalized Gaussian of width sigma sources
    Phi(r) = -(kappa/r) erf(r / (sqrt(2) sigma))."""
    sigma = 1.0
    kappa = 2.0
    rho = gaussian_packet(grid3, width=sigma).density()
    phi = potential_from_density(rho, KernelSpec.newtonian(truncated=True), kappa, grid3)
    mesh = grid3.coordinate_mesh()
    r = np.sqrt(sum(np.broadcast_to(x, grid3.shape) ** 2 for x in mesh))
    interior = (r > 2 * grid3.spacing) & (r < 0.23 * grid3.box_length)
    expected = -kappa / r[interior] * erf(r[interior] / (math.sqrt(2.0) * sigma))
    rel = np.abs(phi[interior] - expected) / np.abs(expected)
    assert np.max(rel) < 1e-3


def test_potential_solves_poisson_interior(grid3):
    """Finite-difference check of laplacian(Phi) = 4 pi kappa rho."""
    kappa = 1.0
    rho = gaussian_packet(grid3, width=1.2).density()
    phi = potential_from_density(rho, KernelSpec.newtonian(truncated=True), kappa, grid3)
    h = grid3.spacing
    lap = (np.roll(phi, 1, 0) + np.roll(phi, -1, 0) + np.roll(phi, 1, 1)
           + np.roll(phi, -1, 1) + np.roll(phi, 1, 2) + np.roll(phi, -1, 2)
           - 6 * phi) / h**2
    target = 4.0 * math.pi * kappa * rho
    # FD truncation O(h^2 * phi'''') dominates; compare where rho is significant
    mask = rho > rho.max() * 1e-3
    assert np.max(np.abs(lap[mask] - target[mask])) < 0.02 * target.max()


def test_direct_circular_convolution_matches_fft_route():
    grid = Grid(dimension=1, points_per_axis=64, spacing=0.25)
    kern = KernelSpec.softened(epsilon=0.5)
    rho = gaussian_packet(grid, width=1.0).density()
    sym = kernel_symbol(kern, grid)
    kernel_samples = np.real(sfft.ifft(sym)) / grid.spacing
    expected = oracles.circular_convolution_potential_1d(rho, kernel_samples,
                                                         grid.spacing, kappa=1.7)
    phi = potential_from_density(rho, kern, 1.7, grid)
    assert np.allclose(phi, expected, atol=1e-12)


def test_softened_symbol_is_bessel_k0():
    grid = Grid(dimension=1, points_per_axis=32, spacing=0.5)
    eps = 1.1
    sym = kernel_symbol(KernelSpec.softened(eps), grid)
    k = grid.axis_wavenumbers()
    assert sym[0] == 0.0
    nz = k != 0
    assert np.allclose(sym[nz], 2.0 * k0(np.abs(k[nz]) * eps), rtol=1e-12)


def test_smeared_kernel_suppresses_high_k():
    grid = Grid(dimension=3, points_per_axis=16, spacing=0.5)
    plain = kernel_symbol(KernelSpec.newtonian(), grid)
    smeared = kernel_symbol(KernelSpec.smeared(r0=1.0), grid)
    k2 = grid.k_squared()
    nz = k2 > 0
    assert np.all(smeared[nz] <= plain[nz] + 1e-15)
    assert np.allclose(smeared[nz], plain[nz] * np.exp(-2 * k2[nz]), rtol=1e-12)


def test_kernel_grid_dimension_mismatch():
    grid1 = Grid(dimension=1, points_per_axis=16, spacing=0.5)
    rho = gaussian_packet(grid1, width=1.0).density()
    with pytest.raises(ValidationError):
        potential_from_density(rho, KernelSpec.newtonian(), 1.0, grid1)


def test_density_contract_checks():
    grid = Grid(dimension=1, points_per_axis=32, spacing=0.5)
    kern = KernelSpec.softened(1.0)
    rho = gaussian_packet(grid, width=1.0).density()
    with pytest.raises(ContractViolationError):
        potential_from_density(2.0 * rho, kern, 1.0, grid)
    bad = rho.copy()
    bad[0] = -1e-3
    with pytest.raises(ContractViolationError):
        potential_from_density(bad, kern, 1.0, grid)


# --- kinetic propagation ----------------------------------------------------

def test_kinetic_dt_zero_is_identity():
    grid = Grid(dimension=1, points_per_axis=128, spacing=0.1)
    st = gaussian_packet(grid, width=1.0, momentum=2.0)
    out = kinetic_half_step(st, 0.0)
    assert np.allclose(out.amplitudes, st.amplitudes, atol=1e-14)


def test_kinetic_plane_wave_phase():
    grid = Grid(dimension=1, points_per_axis=64, spacing=0.25)
    k0_mode = grid.axis_wavenumbers()[5]
    x = grid.axis_coordinates()
    st = WaveFunction.normalized(grid, np.exp(1j * k0_mode * x))
    dt = 0.37
    out = kinetic_half_step(st, dt)
    expected = st.amplitudes * np.exp(-1j * k0_mode**2 * dt / 4.0)
    assert np.allclose(out.amplitudes, expected, atol=1e-12)
    assert np.allclose(np.abs(out.amplitudes), np.abs(st.amplitudes), atol=1e-12)


def test_repeated_kinetic_steps_reproduce_free_gaussian_law():
    grid = Grid(dimension=1, points_per_axis=1024, spacing=0.1)
    sigma0 = 1.0
    st = gaussian_packet(grid, width=sigma0)
    dt = 0.05
    from snlab.diagnostics import rms_width
    widths = []
    times = []
    cur = st
    for n in range(1, 81):
        cur = kinetic_half_step(kinetic_half_step(cur, dt), dt)
        if n % 10 == 0:
            times.append(n * dt)
            widths.append(rms_width(cur.density(), grid))
    expected = oracles.free_gaussian_width(np.array(times), sigma0)
    assert np.max(np.abs(np.array(widths) - expected) / expected) < 1e-6


def test_kinetic_unitarity_and_reversibility(rng):
    grid = Grid(dimension=3, points_per_axis=16, spacing=0.5)
    amp = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    st = WaveFunction.normalized(grid, amp)
    out = kinetic_half_step(st, 0.19)
    assert abs(norm(out) - 1.0) < 1e-12
    back = kinetic_half_step(out, -0.19)
    assert np.max(np.abs(back.amplitudes - st.amplitudes)) < 1e-12


def test_parseval_kinetic_vs_finite_difference():
    """Spectral kinetic energy matches the real-space gradient energy to
    O(h^2): halving h shrinks the gap ~4x."""
    gaps = []
    for n, h in [(64, 0.4), (128, 0.2)]:
        grid = Grid(dimension=1, points_per_axis=n, spacing=h)
        st = gaussian_packet(grid, width=1.0, momentum=1.0)
        psi_k = sfft.fftn(st.amplitudes)
        t_spec = float(np.sum(0.5 * grid.k_squared() * np.abs(psi_k) ** 2)
                       * grid.cell_volume / grid.size)
        grad = (np.roll(st.amplitudes, -1) - np.roll(st.amplitudes, 1)) / (2 * h)
        t_fd = float(0.5 * np.sum(np.abs(grad) ** 2) * h)
        gaps.append(abs(t_spec - t_fd))
    assert gaps[1] < gaps[0] / 3.0


# --- k-space nonlinearity ---------------------------------------------------

def test_kernel_equivalence_on_random_states(rng):
    """Mode-sum route vs Poisson-convolution route on random states."""
    grid = Grid(dimension=3, points_per_axis=32, spacing=0.5)
    kern = KernelSpec.newtonian()
    worst = 0.0
    for _ in range(100):
        amp = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        st = WaveFunction.normalized(grid, amp)
        via_modes = kspace_nonlinear_term(st, kappa=1.7)
        phi = potential_from_density(st.density(), kern, 1.7, grid)
        via_conv = phi * st.amplitudes
        rel = np.linalg.norm(via_modes - via_conv) / np.linalg.norm(via_conv)
        worst = max(worst, rel)
    assert worst < 1e-8


def test_kspace_nonlinear_zero_coupling(grid3):
    st = gaussian_packet(grid3, width=1.0)
    assert np.max(np.abs(kspace_nonlinear_term(st, 0.0))) == 0.0


def test_kspace_nonlinear_uniform_density():
    grid = Grid(dimension=3, points_per_axis=16, spacing=0.5)
    amp = np.full(grid.shape, 1.0 + 0j)
    st = WaveFunction.normalized(grid, amp)
    assert np.max(np.abs(kspace_nonlinear_term(st, 2.0))) < 1e-12


def test_kspace_nonlinear_rejects_1d():
    grid = Grid(dimension=1, points_per_axis=64, spacing=0.25)
    st = gaussian_packet(grid, width=1.0)
    with pytest.raises(ValidationError):
        kspace_nonlinear_term(st, 1.0)
