"""Collapse-model machinery: Lindblad master equation, diffusive stochastic
wave-function unraveling, the gravitationally-motivated operator family
with Gaussian cutoff, and its heating rate.

The master equation is

    drho/dt = -i [H, rho]
              + gamma sum_a w_a (A_a rho A_a^dag - 1/2 {A_a^dag A_a, rho}),

where the weights w_a carry the k-integration measure when the family
discretizes a continuum of modes.  The wave-function unraveling is the
standard norm-preserving diffusive one,

    dpsi = [-i H dt
            + sqrt(gamma) sum_a sqrt(w_a) (A_a - l_a) dW_a
            - gamma/2 sum_a w_a (A_a^dag A_a - 2 l_a A_a + l_a^2) dt] psi,

with l_a = (<A_a^dag> + <A_a>)/2, integrated in the Ito sense by
Euler-Maruyama with per-step renormalization.  Its ensemble mean projector
reproduces the master equation.

The gravitational family consists of modes rho_c(k) e^{ikx}/|k| over the
nonzero lattice wavenumbers, rho_c(k) = exp(-k^2 R0^2); conjugate mode
pairs are combined into the dissipator-equivalent Hermitian pair
sqrt(2) cos(kx), sqrt(2) sin(kx) (times rho_c/|k|), which is the
representation used for actual evolution.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import (BlowupError, ResolutionError, StepSizeError,
                     ValidationError)
from .states import DensityMatrix
from .units import CODATA2018

__all__ = ["CutoffSpec", "LindbladFamily", "TrajectoryConfig", "diosi_operators",
           "kinetic_hamiltonian", "lindblad_step", "evolve_lindblad",
           "sse_trajectory", "sse_ensemble", "drift_decomposition",
           "HeatingRate", "heating_rate"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CutoffSpec:
    """Gaussian smearing profile exp(-k^2 R0^2) with cutoff length R0 in metres."""

    r0_m: float

    def __post_init__(self):
        if self.r0_m <= 0:
            raise ValidationError("cutoff R0 must be positive")

    def profile(self, k, length_scale=1.0):
        """exp(-k^2 R0^2) for internal wavenumbers k; R0 converted by length_scale."""
        r0 = self.r0_m / length_scale
        return np.exp(-(np.asarray(k) ** 2) * r0**2)


@dataclass(frozen=True)
class TrajectoryConfig:
    dt: float
    steps: int
    seed: int
    ensemble_size: int = 1
    scheme: str = "ito_euler_maruyama_renormalized"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        if self.ensemble_size < 1:
            raise ValidationError("ensemble_size must be >= 1")


@dataclass(frozen=True)
class LindbladFamily:
    """A weighted set of Lindblad operators over a grid's site basis.

    Operators are stored either as diagonal vectors (multiplication
    operators, the common case here) or as dense matrices.  `hermitian`
    records whether every operator is Hermitian, which the stochastic
    unraveling requires.  For 3D grids only the mode metadata
    (`mode_coeff_grid`) is kept; dense operators are never materialized.
    """

    grid: object
    gamma: float
    weights: np.ndarray
    operators: tuple = ()
    diagonal: bool = True
    hermitian: bool = True
    mode_wavenumbers: np.ndarray | None = None
    mode_coeff_grid: np.ndarray | None = field(default=None, repr=False)

    def as_matrices(self):
        if not self.operators:
            raise ValidationError("family carries no materialized operators")
        if self.diagonal:
            return [np.diag(op) for op in self.operators]
        return list(self.operators)

    @classmethod
    def from_operators(cls, grid, operators, gamma, weights=None, hermitian=None):
        """Wrap explicit operators (diagonal vectors or square matrices)."""
        ops = [np.asarray(op, dtype=np.complex128) for op in operators]
        diagonal = all(op.ndim == 1 for op in ops)
        if weights is None:
            weights = np.ones(len(ops))
        if hermitian is None:
            hermitian = all(
                np.allclose(op, op.conj()) if op.ndim == 1
                else np.allclose(op, op.conj().T) for op in ops)
        return cls(grid=grid, gamma=float(gamma), weights=np.asarray(weights, dtype=float),
                   operators=tuple(ops), diagonal=diagonal, hermitian=hermitian)


def diosi_operators(grid, cutoff=None, unit_system=None, gamma=None,
                    representation="hermitian"):
    """Gravitational Lindblad family on a grid.

    Mode form: L(k) = rho_c(k) e^{ikx} / |k| over all nonzero lattice
    wavenumbers (the particle mass is absorbed into gamma).  With
    `representation="hermitian"` conjugate pairs are combined into real
    cos/sin multiplication operators with identical total dissipator.

    gamma defaults to kappa / (2 pi^2), the internal-unit value of the
    gravitational coupling G / (2 pi^2 hbar); pass it explicitly for
    dimensionless studies.
    """
    if representation not in ("hermitian", "modes"):
        raise ValidationError("representation must be 'hermitian' or 'modes'")
    length_scale = unit_system.length_scale if unit_system is not None else 1.0
    if gamma is None:
        if unit_system is None:
            raise ValidationError("diosi_operators needs a unit_system or explicit gamma")
        gamma = unit_system.kappa / (2.0 * math.pi**2)
    if cutoff is not None:
        r0_internal = cutoff.r0_m / length_scale
        if r0_internal < grid.spacing:
            raise ResolutionError(
                f"cutoff {r0_internal} internal units is below the grid spacing {grid.spacing}")

    def coeff(kmag):
        c = np.zeros_like(kmag)
        nz = kmag != 0.0
        c[nz] = 1.0 / kmag[nz]
        if cutoff is not None:
            c = c * cutoff.profile(kmag, length_scale)
        return c

    if grid.dimension == 3:
        kmag = np.sqrt(grid.k_squared())
        family = LindbladFamily(
            grid=grid, gamma=float(gamma),
            weights=np.array([(2.0 * math.pi / grid.box_length) ** 3]),
            operators=(), diagonal=True, hermitian=False,
            mode_coeff_grid=coeff(kmag))
        return family

    k = grid.axis_wavenumbers()
    x = grid.axis_coordinates()
    dk = 2.0 * math.pi / grid.box_length
    n = grid.points_per_axis
    ops, weights, mode_ks = [], [], []
    if representation == "modes":
        for j in range(n):
            if k[j] == 0.0:
                continue
            c = coeff(np.abs(np.array([k[j]])))[0]
            ops.append(c * np.exp(1j * k[j] * x))
            weights.append(dk)
            mode_ks.append(k[j])
        hermitian = False
    else:
        for j in range(1, n // 2):
            c = coeff(np.array([abs(k[j])]))[0]
            ops.append(math.sqrt(2.0) * c * np.cos(k[j] * x))
            ops.append(math.sqrt(2.0) * c * np.sin(k[j] * x))
            weights += [dk, dk]
            mode_ks += [k[j], k[j]]
        # Nyquist mode is real on the lattice and self-conjugate: keep as is
        j = n // 2
        c = coeff(np.array([abs(k[j])]))[0]
        ops.append(c * np.cos(k[j] * x))
        weights.append(dk)
        mode_ks.append(k[j])
        hermitian = True
    return LindbladFamily(
        grid=grid, gamma=float(gamma), weights=np.asarray(weights, dtype=float),
        operators=tuple(np.asarray(o, dtype=np.complex128) for o in ops),
        diagonal=True, hermitian=hermitian,
        mode_wavenumbers=np.asarray(mode_ks))


def kinetic_hamiltonian(grid):
    """Dense spectral kinetic-energy matrix p^2/2 over the site basis (1D)."""
    if grid.dimension != 1:
        raise ValidationError("dense Hamiltonians are built for 1D grids")
    n = grid.points_per_axis
    k2 = grid.axis_wavenumbers() ** 2
    h = np.fft.ifft(0.5 * k2[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0)
    return 0.5 * (h + h.conj().T)


def dissipator(family, matrix):
    """gamma sum_a w_a (A rho A^dag - 1/2 {A^dag A, rho}) for a density matrix array."""
    out = np.zeros_like(matrix)
    for w, op in zip(family.weights, family.operators):
        if family.diagonal:
            a = op[:, None]
            ad_a = (np.abs(op) ** 2)[:, None]
            term = a * matrix * a.conj().T - 0.5 * (ad_a * matrix + matrix * ad_a.T)
        else:
            am = op @ matrix
            term = am @ op.conj().T - 0.5 * (op.conj().T @ am + matrix @ (op.conj().T @ op))
        out += w * term
    return family.gamma * out


def lindblad_step(rho, family, hamiltonian, dt):
    """One RK4 step of the master equation; trace preserved to 1e-8."""
    if family.mode_coeff_grid is not None and not family.operators:
        raise ValidationError("3D mode families carry no dense operators for Lindblad work")

    if hamiltonian is None:
        def rhs(m):
            return dissipator(family, m)
    else:
        def rhs(m):
            return -1j * (hamiltonian @ m - m @ hamiltonian) + dissipator(family, m)

    m = rho.matrix
    k1 = rhs(m)
    k2 = rhs(m + 0.5 * dt * k1)
    k3 = rhs(m + 0.5 * dt * k2)
    k4 = rhs(m + dt * k3)
    out = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    trace_drift = abs(np.trace(out).real - 1.0)
    if not trace_drift <= 1e-8:   # NaN-safe
        raise StepSizeError(f"trace drift {trace_drift:.3e} exceeds 1e-8; reduce dt")
    herm = np.max(np.abs(out - out.conj().T))
    if not herm <= 1e-10:
        raise StepSizeError(f"hermiticity deviation {herm:.3e} exceeds 1e-10")
    lo = float(np.linalg.eigvalsh(out).min())
    if lo < -1e-6:
        log.warning("lindblad_step: positivity violation %.3e beyond 1e-6", lo)
    return DensityMatrix(rho.grid, out)


def evolve_lindblad(rho, family, hamiltonian, dt, steps, record_every=1):
    """Repeated lindblad_step with a small observables trace."""
    rows = {"time": [], "trace": [], "purity": [], "max_offdiagonal": []}

    def record(r, t):
        rows["time"].append(t)
        rows["trace"].append(float(np.trace(r.matrix).real))
        rows["purity"].append(r.purity())
        off = r.matrix - np.diag(np.diag(r.matrix))
        rows["max_offdiagonal"].append(float(np.abs(off).max()))

    record(rho, 0.0)
    for i in range(1, steps + 1):
        rho = lindblad_step(rho, family, hamiltonian, dt)
        if i % record_every == 0 or i == steps:
            record(rho, i * dt)
    return {k: np.asarray(v) for k, v in rows.items()}, rho


def _trajectory_rng(seed, trajectory_index):
    # fixed splitting rule: one master seed, one stream per trajectory index
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(trajectory_index,)))


def sse_trajectory(psi0, family, hamiltonian, cfg, trajectory_index=0,
                   return_prenorm=False):
    """One diffusive collapse trajectory; returns states of shape (steps+1, n).

    The Hamiltonian part is applied as an exact unitary substep (spectral
    diagonalization, computed once), the collapse drift and noise by Ito
    Euler-Maruyama, followed by renormalization.  With gamma = 0 the
    trajectory is exactly the deterministic propagation.
    """
    if not family.hermitian:
        raise ValidationError("the stochastic solver uses the Hermitian representation")
    grid = psi0.grid
    h_d = grid.cell_volume
    psi = psi0.amplitudes.ravel().astype(np.complex128)
    n = psi.size

    if hamiltonian is None:
        propagator = None
    else:
        evals, evecs = np.linalg.eigh(hamiltonian)
        propagator = (evecs * np.exp(-1j * evals * cfg.dt)) @ evecs.conj().T

    gamma = family.gamma
    stochastic = gamma != 0.0 and len(family.operators) > 0
    if stochastic:
        ops = [op.real if family.diagonal else op for op in family.operators]
        sqrt_gw = np.sqrt(gamma * family.weights)
        gw = gamma * family.weights
        rng = _trajectory_rng(cfg.seed, trajectory_index)
        noise = rng.normal(0.0, math.sqrt(cfg.dt), size=(cfg.steps, len(ops)))

    states = np.empty((cfg.steps + 1, n), dtype=np.complex128)
    states[0] = psi
    prenorm = np.empty(cfg.steps) if return_prenorm else None

    for i in range(cfg.steps):
        if stochastic:
            delta = np.zeros_like(psi)
            for a, op in enumerate(ops):
                opsi = op * psi if family.diagonal else op @ psi
                ell = float(np.real(np.vdot(psi, opsi)) * h_d)
                centered = opsi - ell * psi
                op_centered = (op * centered if family.diagonal else op @ centered) \
                    - ell * centered
                delta += sqrt_gw[a] * noise[i, a] * centered \
                    - 0.5 * gw[a] * cfg.dt * op_centered
            psi = psi + delta
        if propagator is not None:
            psi = propagator @ psi
        nrm2 = float(np.real(np.vdot(psi, psi)) * h_d)
        if not np.isfinite(nrm2) or nrm2 == 0.0:
            raise BlowupError(f"non-finite trajectory at step {i + 1} (seed {cfg.seed}, "
                              f"trajectory {trajectory_index})",
                              step_index=i + 1, seed=cfg.seed)
        if return_prenorm:
            prenorm[i] = nrm2
        psi = psi / math.sqrt(nrm2)
        states[i + 1] = psi

    if return_prenorm:
        return states, prenorm
    return states


def sse_ensemble(psi0, family, hamiltonian, cfg):
    """Run cfg.ensemble_size independent trajectories.

    Returns (rho_mean, finals): the ensemble-mean projector at final time
    (site-basis density matrix, trace 1) and the final state of every
    trajectory.  Accumulation is in trajectory order, so results are
    bitwise reproducible for a fixed seed.
    """
    h_d = psi0.grid.cell_volume
    n = psi0.amplitudes.size
    rho_mean = np.zeros((n, n), dtype=np.complex128)
    finals = np.empty((cfg.ensemble_size, n), dtype=np.complex128)
    for m in range(cfg.ensemble_size):
        states = sse_trajectory(psi0, family, hamiltonian, cfg, trajectory_index=m)
        fin = states[-1]
        finals[m] = fin
        rho_mean += np.outer(fin, fin.conj()) * h_d
    rho_mean /= cfg.ensemble_size
    return rho_mean, finals


def drift_decomposition(state, family, gamma=None):
    """Split the collapse drift and exhibit the gravitational term inside it.

    Returns labeled fields for a normalized 3D state:

      hamiltonian_drift        -i (p^2/2) psi
      dissipative_drift        -gamma/2 int d3k (L^dag L - 2 l L + l^2) psi
      substitution_sn_term     i gamma int d3k <L^dag(k)> L(k) psi, the extra
                               deterministic term produced by shifting the
                               noise by i sqrt(gamma) <L^dag>
      substitution_counter_term  -i gamma (int d3k <L^dag> l) psi, the
                               unavoidable companion term of that shift
      sn_term                  the target gravitational term, same mode sum
      sn_coefficient_ratio     projection of substitution_sn_term onto
                               sn_term (1 when the substitution reproduces
                               the gravitational coefficient exactly)

    The noise shift written with sqrt(gamma) keeps dimensions consistent;
    the squared factor is what multiplies the recovered term.
    """
    grid = state.grid
    if grid.dimension != 3:
        raise ValidationError("drift decomposition is defined on 3D grids")
    if family.mode_coeff_grid is None:
        raise ValidationError("drift decomposition needs a 3D mode family")
    state.require_normalized()
    if gamma is None:
        gamma = family.gamma
    psi = state.amplitudes
    h_d = grid.cell_volume
    measure = float(family.weights[0])
    c = family.mode_coeff_grid                      # profile/|k| on the k lattice

    kin = sfft.ifftn(0.5 * grid.k_squared() * sfft.fftn(psi))
    hamiltonian_drift = -1j * kin

    if gamma == 0.0:
        zero = np.zeros_like(psi)
        return {"hamiltonian_drift": hamiltonian_drift, "dissipative_drift": zero,
                "substitution_sn_term": zero, "substitution_counter_term": zero,
                "sn_term": zero, "sn_coefficient_ratio": float("nan")}

    rho_hat = sfft.fftn(state.density()) * h_d      # <e^{-ik.r}> per mode
    ell = c * rho_hat.real                          # l(k) = (<L^dag> + <L>)/2
    l_dag_exp = c * rho_hat                         # <L^dag(k)>

    def mode_sum(coeff_grid):
        # sum_k measure * coeff(k) e^{ikx}  ->  field over the grid
        return sfft.ifftn(coeff_grid) * grid.size * measure

    sn_mode_field = mode_sum(c * l_dag_exp)         # int d3k <L^dag(k)> L(k) acting part
    sn_term = 1j * gamma * sn_mode_field * psi

    # deterministic drift of the collapse equation
    s_ldl = float(np.sum(c * c) * measure)          # int d3k L^dag L  (scalar: |L|^2 = c^2)
    two_ell_l = 2.0 * mode_sum(c * ell)
    s_ell2 = float(np.sum(ell * ell) * measure)
    dissipative_drift = -0.5 * gamma * (s_ldl - two_ell_l + s_ell2) * psi

    # noise shift xi -> xi' + i sqrt(gamma) <L^dag> adds
    # i gamma int <L^dag> (L - l) psi = sn - counter
    substitution_sn_term = 1j * gamma * sn_mode_field * psi
    z_counter = complex(np.sum(l_dag_exp * ell) * measure)
    substitution_counter_term = -1j * gamma * z_counter * psi

    num = complex(np.vdot(sn_term, substitution_sn_term) * h_d)
    den = float(np.real(np.vdot(sn_term, sn_term)) * h_d)
    ratio = float(np.real(num / den)) if den > 0 else float("nan")

    return {"hamiltonian_drift": hamiltonian_drift,
            "dissipative_drift": dissipative_drift,
            "substitution_sn_term": substitution_sn_term,
            "substitution_counter_term": substitution_counter_term,
            "sn_term": sn_term,
            "sn_coefficient_ratio": ratio}


@dataclass(frozen=True)
class HeatingRate:
    watts: float
    kelvin_per_second: float


def heating_rate(mass_kg, cutoff, constants=CODATA2018):
    """Energy production rate of the cutoff family for a free particle.

    For H = p^2/2m the mode k contributes
    (m rho_c^2(k)/k^2)(hbar k.<p> + hbar^2 k^2/2); the <p> part integrates
    to zero, leaving

        dE/dt = gamma (m hbar^2 / 2) int d3k rho_c^2(k)
              = gamma m hbar^2 (pi/2)^{3/2} / (2 R0^3),

    finite for every R0 > 0 and diverging as R0^-3 when the cutoff is
    removed.  Temperature rate uses E = kB T.
    """
    if mass_kg <= 0:
        raise ValidationError("mass must be positive")
    gamma = constants.G / (2.0 * math.pi**2 * constants.hbar)
    watts = gamma * mass_kg * constants.hbar**2 * (math.pi / 2.0) ** 1.5 \
        / (2.0 * cutoff.r0_m**3)
    return HeatingRate(watts=watts, kelvin_per_second=watts / constants.kB)
