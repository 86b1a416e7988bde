"""Two distinguishable particles of equal mass on a shared 1D lattice.

Three interaction modes distinguish mean-field gravity from fundamentally
semi-classical gravity at the two-body level:

    none              V = 0; product states stay product.
    linear_pairwise   fixed pair potential V(x1, x2) = -kappa K(x1 - x2)
                      with the softened kernel K.  Separable in
                      centre-of-mass/relative coordinates, so the COM
                      marginal spreads exactly like a free particle of
                      mass 2.
    sn_selfconsistent both particles fall in the potential sourced by the
                      summed marginal density (self terms included):
                      V(x1, x2) = Phi_t(x1) + Phi_t(x2) with
                      Phi_t = -kappa (rho_1 + rho_2) * K.  The COM
                      marginal self-gravitates.

The inclusion of the i = j self terms in the second mode is deliberate:
that is exactly where the two descriptions part ways.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from .errors import BlowupError, ValidationError
from .spectral import apply_kernel, kernel_symbol
from .states import TwoParticleWaveFunction

__all__ = ["step_two_particle", "evolve_two_particle", "com_moments", "schmidt_values"]

INTERACTIONS = ("sn_selfconsistent", "linear_pairwise", "none")


def _pair_potential(grid, kernel, kappa):
    """-kappa K(x1 - x2) tabulated on the (x1, x2) lattice, periodic distance."""
    # real-space kernel consistent with the spectral symbol: inverse FFT of it
    sym = kernel_symbol(kernel, grid)
    kernel_real = sfft.ifft(sym).real / grid.spacing  # symbol -> periodic K(x) samples
    n = grid.points_per_axis
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return -kappa * kernel_real[idx]


class _TwoBodyStepper:
    def __init__(self, grid, cfg, interaction):
        if interaction not in INTERACTIONS:
            raise ValidationError(f"interaction must be one of {INTERACTIONS}")
        if grid.points_per_axis > 256:
            raise ValidationError("two-particle grids are limited to 256 points per axis")
        self.grid = grid
        self.cfg = cfg
        self.interaction = interaction
        k2 = grid.axis_wavenumbers() ** 2
        self.half_kick = np.exp(-1j * (k2[:, None] + k2[None, :]) * cfg.dt / 4.0)
        self.kappa = cfg.effective_kappa
        if interaction == "linear_pairwise" and self.kappa != 0.0:
            self.v_pair = _pair_potential(grid, cfg.kernel, self.kappa)

    def potential(self, psi):
        if self.kappa == 0.0 or self.interaction == "none":
            return None
        if self.interaction == "linear_pairwise":
            return self.v_pair
        h = self.grid.spacing
        p = np.abs(psi) ** 2
        rho_sum = p.sum(axis=1) * h + p.sum(axis=0) * h  # rho_1 + rho_2, integral 2
        phi = apply_kernel(rho_sum, self.cfg.kernel, self.kappa, self.grid)
        return phi[:, None] + phi[None, :]

    def step(self, psi):
        psi = sfft.ifft2(sfft.fft2(psi) * self.half_kick)
        v = self.potential(psi)
        if v is not None:
            psi = psi * np.exp(-1j * v * self.cfg.dt)
        return sfft.ifft2(sfft.fft2(psi) * self.half_kick)


def step_two_particle(state, cfg, interaction, step_index=None):
    """One Strang step of the two-particle state under the selected interaction."""
    out = _TwoBodyStepper(state.grid, cfg, interaction).step(state.amplitudes)
    if not np.all(np.isfinite(out.view(float))):
        raise BlowupError("non-finite two-particle amplitudes"
                          + ("" if step_index is None else f" at step {step_index}"),
                          step_index=step_index)
    return TwoParticleWaveFunction(state.grid, out)


def com_moments(state):
    """Mean and rms width of the centre-of-mass coordinate X = (x1 + x2)/2."""
    p = state.density()
    h = state.grid.spacing
    w = p * h**2
    x = state.grid.axis_coordinates()
    e1 = float(np.sum(w.sum(axis=1) * x))
    e2 = float(np.sum(w.sum(axis=0) * x))
    e11 = float(np.sum(w.sum(axis=1) * x**2))
    e22 = float(np.sum(w.sum(axis=0) * x**2))
    e12 = float(x @ w @ x)
    mean = 0.5 * (e1 + e2)
    var = 0.25 * (e11 + 2.0 * e12 + e22) - mean**2
    return mean, np.sqrt(max(var, 0.0))


def schmidt_values(state):
    """Singular values of the amplitude matrix (entanglement spectrum)."""
    s = np.linalg.svd(state.amplitudes, compute_uv=False)
    h = state.grid.spacing
    return s * h  # normalized so sum of squares = total norm


def evolve_two_particle(state, cfg, interaction):
    """Step the two-particle state recording COM statistics.

    Returns (trace, final_state); trace columns: time, com_mean, com_width,
    norm, schmidt_ratio.
    """
    stepper = _TwoBodyStepper(state.grid, cfg, interaction)
    rows = {"time": [], "com_mean": [], "com_width": [], "norm": [], "schmidt_ratio": []}

    def record(s, t):
        mean, width = com_moments(s)
        sv = schmidt_values(s)
        rows["time"].append(t)
        rows["com_mean"].append(mean)
        rows["com_width"].append(width)
        rows["norm"].append(s.total_norm())
        rows["schmidt_ratio"].append(float(sv[1] / sv[0]) if len(sv) > 1 else 0.0)

    record(state, 0.0)
    psi = state.amplitudes
    for i in range(1, cfg.steps + 1):
        psi = stepper.step(psi)
        if not np.all(np.isfinite(psi.view(float))):
            raise BlowupError(f"non-finite two-particle amplitudes at step {i}", step_index=i)
        if i % cfg.record_every == 0 or i == cfg.steps:
            record(TwoParticleWaveFunction(state.grid, psi), i * cfg.dt)
    return {k: np.asarray(v) for k, v in rows.items()}, TwoParticleWaveFunction(state.grid, psi)
