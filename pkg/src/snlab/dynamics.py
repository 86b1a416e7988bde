"""Time integration of the self-gravitating Schroedinger family.

One step is a Strang splitting

    psi <- K(dt/2)  exp(-i Phi[|psi|^2] dt)  K(dt/2) psi,

with K the exact spectral kinetic propagator and Phi the Newtonian
potential sourced by the density after the first half kick.  Because the
potential phase leaves the density unchanged, freezing it at that midpoint
keeps the scheme second order in dt.  The potential is a real
multiplication operator, so the norm is conserved to FFT rounding.

Spinor evolution reuses the same splitting per component.  Two coupling
modes exist for the Stern-Gerlach comparison:

    separate  each component is steered by its own unit-weight density
              (spin eigenstate case: two independent runs in one state);
    shared    both components feel one common potential built from the
              half-weighted sum of the unit-normalized component
              densities, i.e. the superposition case where the two
              branches attract each other.

Component weights are individually conserved (real potentials), so the
unit-normalization of each branch density is well defined throughout.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .diagnostics import diagnostics
from .errors import BlowupError, ConvergenceError, ValidationError
from .spectral import KernelSpec, apply_kernel, kernel_symbol, kinetic_factor
from .states import SpinorWaveFunction, WaveFunction, gaussian_packet

__all__ = ["EvolutionConfig", "step_sn", "evolve", "ground_state", "step_spinor",
           "evolve_spinor"]

log = logging.getLogger(__name__)

MODES = ("sn", "free", "hartree_linear")


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    steps: int
    kappa: float
    kernel: KernelSpec
    record_every: int = 1
    mode: str = "sn"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        if self.record_every < 1:
            raise ValidationError("record_every must be >= 1")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}")

    @property
    def effective_kappa(self):
        # the one-body Hartree equation is formally identical to the
        # self-gravitating one; the distinction only matters at N-body level
        return 0.0 if self.mode == "free" else self.kappa


class _Stepper:
    """Precomputed factors for repeated Strang steps on one grid."""

    def __init__(self, grid, cfg):
        self.grid = grid
        self.cfg = cfg
        self.half_kick = kinetic_factor(grid, cfg.dt)
        self.kappa = cfg.effective_kappa
        if self.kappa != 0.0:
            self.neg_symbol = -self.kappa * kernel_symbol(cfg.kernel, grid)
            n = grid.points_per_axis
            self.neg_symbol_r = self.neg_symbol[..., : n // 2 + 1]

    def potential(self, density):
        spec = sfft.rfftn(density)
        return sfft.irfftn(spec * self.neg_symbol_r, s=self.grid.shape)

    def step_field(self, amp):
        amp = sfft.ifftn(sfft.fftn(amp) * self.half_kick)
        if self.kappa != 0.0:
            phi = self.potential(np.abs(amp) ** 2)
            amp = amp * np.exp(-1j * phi * self.cfg.dt)
        return sfft.ifftn(sfft.fftn(amp) * self.half_kick)


def _check_finite(amp, step_index, what="amplitudes"):
    if not np.all(np.isfinite(amp.view(float))):
        where = "" if step_index is None else f" at step {step_index}"
        raise BlowupError(f"non-finite {what}{where}", step_index=step_index)


def step_sn(state, cfg, step_index=None):
    """One Strang-split step of the self-gravitating Schroedinger equation."""
    out = _Stepper(state.grid, cfg).step_field(state.amplitudes)
    _check_finite(out, step_index)
    return WaveFunction(state.grid, out)


def evolve(state, cfg, unit_system=None):
    """Run cfg.steps Strang steps, recording diagnostics every record_every
    steps (plus the initial state).  Returns (records, final_state)."""
    state.require_normalized()
    stepper = _Stepper(state.grid, cfg)
    kappa = cfg.effective_kappa
    records = [diagnostics(state, unit_system, kernel=cfg.kernel, kappa=kappa, time=0.0)]
    amp = state.amplitudes
    for i in range(1, cfg.steps + 1):
        amp = stepper.step_field(amp)
        _check_finite(amp, i)
        if i % cfg.record_every == 0 or i == cfg.steps:
            snap = WaveFunction(state.grid, amp)
            records.append(diagnostics(snap, unit_system, kernel=cfg.kernel,
                                       kappa=kappa, time=i * cfg.dt))
    return records, WaveFunction(state.grid, amp)


DEFAULT_DTAU_LADDER = (0.2, 0.05, 0.0125)


def ground_state(grid, kappa, tol=1e-10, kernel=None, initial=None,
                 dtau_ladder=None, max_iterations=25000, return_info=False,
                 state_tol=5e-8):
    """Self-bound stationary state by imaginary-time propagation.

    The real-time step is continued to dt -> -i dtau with renormalization
    after every step; dtau is reduced in stages (the splitting bias of the
    fixed point scales with dtau^2).  A stage finishes when both the
    relative energy change per step drops below `tol` and the amplitude
    change per step drops below `state_tol`.  The second criterion matters:
    the energy is quadratically insensitive to the residual breathing-mode
    displacement, so an energy test alone stops while the profile is still
    drifting at the 1e-3 level.  Convergence is checked on a 20-step
    window.

    1D grids (softened kernel) are supported but only qualitatively
    meaningful; a warning is logged.
    """
    if kappa <= 0:
        raise ValidationError("ground state requires kappa > 0")
    if kernel is None:
        kernel = KernelSpec.default_for(grid)
    if grid.dimension == 1:
        log.warning("1D ground state uses the softened kernel; results are qualitative")
    if dtau_ladder is None:
        # inverse-energy timescale shrinks like kappa^2 under self-similar rescaling
        dtau_ladder = tuple(d / kappa for d in DEFAULT_DTAU_LADDER)

    if initial is None:
        initial = gaussian_packet(grid, width=2.5 / kappa)
    amp = initial.amplitudes.astype(np.complex128)
    h_d = grid.cell_volume
    k2 = grid.k_squared()
    neg_sym = -kappa * kernel_symbol(kernel, grid)
    neg_sym_r = neg_sym[..., : grid.points_per_axis // 2 + 1]

    def energy(amp):
        spec = sfft.fftn(amp)
        kin = float(np.sum(0.5 * k2 * np.abs(spec) ** 2) * h_d / grid.size)
        rho = np.abs(amp) ** 2
        phi = sfft.irfftn(sfft.rfftn(rho) * neg_sym_r, s=grid.shape)
        return kin + float(0.5 * np.sum(phi * rho) * h_d)

    window = 20
    total_iters = 0
    residual = np.inf
    for dtau in dtau_ladder:
        decay = np.exp(-0.25 * k2 * dtau)
        e_old = np.inf
        amp_old = None
        converged = False
        while total_iters < max_iterations:
            amp = sfft.ifftn(sfft.fftn(amp) * decay)
            rho = np.abs(amp) ** 2
            phi = sfft.irfftn(sfft.rfftn(rho / (rho.sum() * h_d)) * neg_sym_r, s=grid.shape)
            amp = amp * np.exp(-phi * dtau)
            amp = sfft.ifftn(sfft.fftn(amp) * decay)
            amp = amp / np.sqrt(np.sum(np.abs(amp) ** 2) * h_d)
            total_iters += 1
            if total_iters % window == 0:
                e = energy(amp)
                residual = abs(e - e_old) / (window * abs(e))
                drift = (np.max(np.abs(amp - amp_old)) / (window * np.max(np.abs(amp)))
                         if amp_old is not None else np.inf)
                if residual < tol and drift < state_tol:
                    converged = True
                    break
                e_old = e
                amp_old = amp
        if not converged:
            raise ConvergenceError(
                f"imaginary-time stage dtau={dtau} not converged after "
                f"{total_iters} total iterations (per-step residual {residual:.3e})",
                residual=residual)

    result = WaveFunction.normalized(grid, amp)
    if return_info:
        info = {"iterations": total_iters, "energy": energy(amp),
                "residual": residual, "qualitative": grid.dimension == 1,
                "dtau_ladder": tuple(dtau_ladder)}
        return result, info
    return result


def _branch_potentials(spinor, coupling_mode, kappa, kernel):
    """Potentials (phi_plus, phi_minus) for the two coupling modes.

    Branch densities are renormalized to unit weight; empty branches are
    dropped.  `separate` couples each branch to its own full-weight
    density; `shared` couples both branches to the common half-weighted
    sum, which for a single populated branch reduces to a half-strength
    self-interaction.
    """
    grid = spinor.grid
    wp, wm = spinor.component_weights()
    branches = []
    if wp > 1e-12:
        branches.append((np.abs(spinor.plus) ** 2 / wp, "plus"))
    if wm > 1e-12:
        branches.append((np.abs(spinor.minus) ** 2 / wm, "minus"))
    if coupling_mode == "separate":
        phis = {name: apply_kernel(rho, kernel, kappa, grid) for rho, name in branches}
        zero = np.zeros(grid.shape)
        return phis.get("plus", zero), phis.get("minus", zero)
    if coupling_mode == "shared":
        rho_sum = sum(rho for rho, _ in branches)
        phi = apply_kernel(rho_sum, kernel, 0.5 * kappa, grid)
        return phi, phi
    raise ValidationError(f"coupling_mode must be 'separate' or 'shared', got {coupling_mode!r}")


def step_spinor(state, cfg, coupling_mode, step_index=None):
    """One Strang step of both spinor components under the selected coupling."""
    grid = state.grid
    half = kinetic_factor(grid, cfg.dt)
    plus = sfft.ifftn(sfft.fftn(state.plus) * half)
    minus = sfft.ifftn(sfft.fftn(state.minus) * half)
    mid = SpinorWaveFunction(grid, plus, minus)
    if cfg.effective_kappa != 0.0:
        phi_p, phi_m = _branch_potentials(mid, coupling_mode, cfg.effective_kappa, cfg.kernel)
        plus = plus * np.exp(-1j * phi_p * cfg.dt)
        minus = minus * np.exp(-1j * phi_m * cfg.dt)
    plus = sfft.ifftn(sfft.fftn(plus) * half)
    minus = sfft.ifftn(sfft.fftn(minus) * half)
    _check_finite(plus, step_index, "spinor amplitudes")
    _check_finite(minus, step_index, "spinor amplitudes")
    return SpinorWaveFunction(grid, plus, minus)


def evolve_spinor(state, cfg, coupling_mode):
    """Step a spinor state, recording per-branch means and the total norm.

    Returns (trace, final_state) where trace maps column name -> ndarray.
    """
    grid = state.grid
    x = grid.axis_coordinates()
    h = grid.spacing

    def branch_mean(comp, weight):
        if weight < 1e-12:
            return np.nan
        rho = np.abs(comp) ** 2
        rho_axis = rho if grid.dimension == 1 else rho.sum(axis=(1, 2)) * h**2
        return float(np.sum(x * rho_axis) * h / weight)

    rows = {"time": [], "mean_plus": [], "mean_minus": [], "total_norm": [],
            "weight_plus": [], "weight_minus": []}

    def record(s, t):
        wp, wm = s.component_weights()
        rows["time"].append(t)
        rows["mean_plus"].append(branch_mean(s.plus, wp))
        rows["mean_minus"].append(branch_mean(s.minus, wm))
        rows["total_norm"].append(s.total_norm())
        rows["weight_plus"].append(wp)
        rows["weight_minus"].append(wm)

    record(state, 0.0)
    for i in range(1, cfg.steps + 1):
        state = step_spinor(state, cfg, coupling_mode, step_index=i)
        if i % cfg.record_every == 0 or i == cfg.steps:
            record(state, i * cfg.dt)
    return {k: np.asarray(v) for k, v in rows.items()}, state
