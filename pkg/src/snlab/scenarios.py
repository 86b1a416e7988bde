"""Canned experiments: self-focusing, two-packet attraction, the spinor
beam-splitting comparison, collapse-model demonstrations, and the
closed-form signalling / regime / heating estimates.

Every runner nondimensionalizes its SI inputs through make_unit_system
(internal length unit = packet width), evolves with fixed, echoed solver
settings, and returns a ScenarioResult whose summary names estimators and
units explicitly.  Runs are deterministic: identical parameters and seed
reproduce identical results bit for bit on one platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import collapse as clp
from .dynamics import EvolutionConfig, evolve, evolve_spinor, ground_state
from .errors import ValidationError
from .grids import Grid
from .spectral import KernelSpec
from .states import (DensityMatrix, SpinorWaveFunction, WaveFunction,
                     gaussian_packet, two_packet_superposition)
from .two_particle import evolve_two_particle
from .units import CODATA2018, make_unit_system

__all__ = ["ScenarioResult", "run_self_focus", "run_two_packet", "run_stern_gerlach",
           "run_ground_state", "run_collapse_lindblad", "run_collapse_sde",
           "signalling_distance", "regime_classifier", "heating_table",
           "run_two_particle_contrast"]

METRES_PER_LIGHT_YEAR = 9.4607304725808e15  # Julian year


@dataclass
class ScenarioResult:
    name: str
    parameters: dict
    series: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)


def _grid_and_units(mass_kg, width_m, dimension, points, box_widths):
    """Internal unit of length = packet width, so the packet has width 1."""
    units = make_unit_system(mass_kg, width_m)
    spacing = box_widths / points
    grid = Grid(dimension=dimension, points_per_axis=points, spacing=spacing)
    kernel = KernelSpec.default_for(grid)
    return grid, units, kernel


def _provenance(grid, kernel, units, dt, seed=None):
    prov = {
        "grid_dimension": grid.dimension,
        "grid_points_per_axis": grid.points_per_axis,
        "grid_spacing_internal": grid.spacing,
        "box_length_internal": grid.box_length,
        "kernel_kind": kernel.kind,
        "kernel_softening_internal": kernel.softening,
        "kernel_truncated": kernel.truncated,
        "dt_internal": dt,
        "kappa": units.kappa if units is not None else None,
        "length_scale_m": units.length_scale if units is not None else None,
        "time_scale_s": units.time_scale if units is not None else None,
    }
    if seed is not None:
        prov["seed"] = seed
    return prov


def run_self_focus(mass_kg=1e-17, width_m=5e-7, dimension=1, points=512,
                   box_widths=16.0, dt=0.002, steps=1500, record_every=15,
                   seed=0):
    """Evolve one Gaussian packet twice from identical data, with gravity off
    and on, and compare the rms width traces."""
    grid, units, kernel = _grid_and_units(mass_kg, width_m, dimension, points, box_widths)
    packet = gaussian_packet(grid, width=1.0)
    base = dict(dt=dt, steps=steps, kappa=units.kappa, kernel=kernel,
                record_every=record_every)
    rec_free, _ = evolve(packet, EvolutionConfig(mode="free", **base), units)
    rec_sn, _ = evolve(packet, EvolutionConfig(mode="sn", **base), units)

    times = np.array([r.time for r in rec_sn])
    w_free = np.array([r.width for r in rec_free])
    w_sn = np.array([r.width for r in rec_sn])
    series = {
        "time": times,
        "width_free": w_free,
        "width_sn": w_sn,
        "width_ratio": w_sn / w_free,
        "norm": np.array([r.norm for r in rec_sn]),
        "kinetic_energy": np.array([r.kinetic_energy for r in rec_sn]),
        "gravitational_energy": np.array([r.gravitational_energy for r in rec_sn]),
        "total_energy": np.array([r.total_energy for r in rec_sn]),
    }
    summary = {
        "kappa": units.kappa,
        "final_width_free_internal": float(w_free[-1]),
        "final_width_sn_internal": float(w_sn[-1]),
        "final_width_ratio": float(w_sn[-1] / w_free[-1]),
        "energy_drift_relative": _energy_drift(series["total_energy"]),
        "width_estimator": "rms_spread_about_centre_of_mass",
    }
    return ScenarioResult("self_focus",
                          dict(mass_kg=mass_kg, width_m=width_m, dimension=dimension,
                               points=points, box_widths=box_widths, dt=dt, steps=steps,
                               record_every=record_every, seed=seed),
                          series, summary, _provenance(grid, kernel, units, dt, seed))


def _energy_drift(total):
    scale = max(abs(total[0]), 1e-30)
    return float(np.max(np.abs(total - total[0])) / scale)


def _half_axis_positions(density, grid):
    """Density-weighted mean position on each half axis (two-packet estimator)."""
    x = grid.axis_coordinates()
    rho = density if grid.dimension == 1 else density.sum(axis=tuple(range(1, grid.dimension)))
    left = x < 0
    right = ~left
    wl = float(np.sum(rho[left]))
    wr = float(np.sum(rho[right]))
    xl = float(np.sum(x[left] * rho[left]) / wl) if wl > 0 else math.nan
    xr = float(np.sum(x[right] * rho[right]) / wr) if wr > 0 else math.nan
    return xl, xr


def run_two_packet(mass_kg=1e-17, width_m=5e-7, separation_widths=8.0, points=512,
                   box_widths=64.0, dt=0.002, steps=7000, record_every=35, seed=0):
    """Symmetric two-packet superposition under self-gravity: the packets
    attract while the centre of mass stays pinned at the midpoint."""
    if separation_widths <= 2.0:
        raise ValidationError("separation must exceed the packet width")
    grid, units, kernel = _grid_and_units(mass_kg, width_m, 1, points, box_widths)
    state = two_packet_superposition(grid, width=1.0, separation=separation_widths)
    cfg = EvolutionConfig(dt=dt, steps=steps, kappa=units.kappa, kernel=kernel,
                          record_every=record_every)

    times, com, widths = [], [], []
    lefts, rights = [], []
    energies, norms = [], []

    from .dynamics import _Stepper  # shared stepping core
    from .diagnostics import diagnostics as diag_fn
    stepper = _Stepper(grid, cfg)

    def record(amp, t):
        snap = WaveFunction(grid, amp)
        rec = diag_fn(snap, units, kernel=kernel, kappa=cfg.effective_kappa, time=t)
        xl, xr = _half_axis_positions(snap.density(), grid)
        times.append(t)
        com.append(rec.centre_of_mass[0])
        widths.append(rec.width)
        lefts.append(xl)
        rights.append(xr)
        energies.append(rec.total_energy)
        norms.append(rec.norm)

    amp = state.amplitudes
    record(amp, 0.0)
    for i in range(1, steps + 1):
        amp = stepper.step_field(amp)
        if i % record_every == 0 or i == steps:
            record(amp, i * dt)

    sep = np.array(rights) - np.array(lefts)
    times = np.array(times)
    com = np.array(com)
    half_idx = np.argmax(sep <= 0.5 * sep[0]) if np.any(sep <= 0.5 * sep[0]) else -1
    merge_idx = int(np.argmin(sep))
    series = {"time": times, "separation": sep, "centre_of_mass": com,
              "packet_left": np.array(lefts), "packet_right": np.array(rights),
              "width": np.array(widths), "total_energy": np.array(energies),
              "norm": np.array(norms)}
    summary = {
        "kappa": units.kappa,
        "initial_separation_internal": float(sep[0]),
        "final_separation_internal": float(sep[-1]),
        "max_abs_centre_of_mass_internal": float(np.max(np.abs(com))),
        # the approach phase ends at half separation; past the merge the
        # focusing instability amplifies rounding noise without bound
        "max_abs_com_approach_internal": float(np.max(np.abs(
            com[: (merge_idx if half_idx < 0 else min(half_idx, merge_idx)) + 1]))),
        "max_abs_com_pre_merge_internal": float(np.max(np.abs(com[: merge_idx + 1]))),
        "time_to_half_separation_internal": float(times[half_idx]) if half_idx >= 0 else math.nan,
        "newtonian_accel_estimate_internal": units.kappa / (2.0 * sep[0] ** 2),
        "packet_position_estimator": "density_weighted_mean_per_half_axis",
        "energy_drift_relative": _energy_drift(np.array(energies)),
    }
    return ScenarioResult("two_packet",
                          dict(mass_kg=mass_kg, width_m=width_m,
                               separation_widths=separation_widths, points=points,
                               box_widths=box_widths, dt=dt, steps=steps,
                               record_every=record_every, seed=seed),
                          series, summary, _provenance(grid, kernel, units, dt, seed))


def run_stern_gerlach(mass_kg=1e-17, width_m=5e-7, kick_internal=1.0,
                      travel_widths=10.0, points=512, box_widths=64.0,
                      dt=0.005, record_every=10, seed=0):
    """Beam-splitting comparison: spin eigenstate vs equal superposition.

    Both runs start from identical data chi_pm = e^{+-i k z} phi(z) at half
    weight each.  In `separate` coupling each branch self-gravitates at
    full weight (eigenstate statistics); in `shared` coupling the branches
    also attract each other, pulling the detection points inward.
    Detection happens when a free packet would have travelled
    `travel_widths` packet widths.
    """
    grid, units, kernel = _grid_and_units(mass_kg, width_m, 1, points, box_widths)
    t_detect = travel_widths / kick_internal
    steps = max(1, int(round(t_detect / dt)))
    x = grid.axis_coordinates()
    phi = gaussian_packet(grid, width=1.0).amplitudes
    spinor = SpinorWaveFunction.normalized(
        grid, phi * np.exp(1j * kick_internal * x), phi * np.exp(-1j * kick_internal * x))
    cfg = EvolutionConfig(dt=dt, steps=steps, kappa=units.kappa, kernel=kernel,
                          record_every=record_every)

    trace_sep, _ = evolve_spinor(spinor, cfg, "separate")
    trace_shr, _ = evolve_spinor(spinor, cfg, "shared")

    def deflection(trace):
        return 0.5 * (trace["mean_plus"] - trace["mean_minus"])

    d_sep = deflection(trace_sep)
    d_shr = deflection(trace_shr)
    series = {"time": trace_sep["time"],
              "deflection_separate": d_sep,
              "deflection_shared": d_shr,
              "total_norm_separate": trace_sep["total_norm"],
              "total_norm_shared": trace_shr["total_norm"]}
    summary = {
        "kappa": units.kappa,
        "detection_time_internal": steps * dt,
        "deflection_separate_internal": float(d_sep[-1]),   # d
        "deflection_shared_internal": float(d_shr[-1]),     # d'
        "deflection_gap_internal": float(d_sep[-1] - d_shr[-1]),
        "ballistic_deflection_internal": kick_internal * steps * dt,
        "deflection_estimator": "per_branch_density_weighted_mean",
    }
    return ScenarioResult("stern_gerlach",
                          dict(mass_kg=mass_kg, width_m=width_m, kick_internal=kick_internal,
                               travel_widths=travel_widths, points=points,
                               box_widths=box_widths, dt=dt, record_every=record_every,
                               seed=seed),
                          series, summary, _provenance(grid, kernel, units, dt, seed))


def run_ground_state(mass_kg=1e-17, width_m=5e-7, dimension=3, points=48,
                     box_widths=33.6, tol=1e-10, seed=0):
    """Imaginary-time relaxation to the self-bound stationary state."""
    grid, units, kernel = _grid_and_units(mass_kg, width_m, dimension, points, box_widths)
    state, info = ground_state(grid, units.kappa, tol=tol, kernel=kernel, return_info=True)
    from .diagnostics import diagnostics as diag_fn
    rec = diag_fn(state, units, kernel=kernel)
    rho = state.density()
    series = {"radius_internal": grid.axis_coordinates(),
              "density_axis_cut": rho if grid.dimension == 1
              else rho[:, grid.points_per_axis // 2, grid.points_per_axis // 2]}
    summary = {
        "kappa": units.kappa,
        "total_energy_internal": rec.total_energy,
        "kinetic_energy_internal": rec.kinetic_energy,
        "gravitational_energy_internal": rec.gravitational_energy,
        "virial_ratio_2T_over_V": 2.0 * rec.kinetic_energy / abs(rec.gravitational_energy),
        "width_internal": rec.width,
        "iterations": info["iterations"],
        "qualitative_1d": info["qualitative"],
        "energy_estimator": "spectral_kinetic_plus_half_phi_rho",
    }
    return ScenarioResult("ground_state",
                          dict(mass_kg=mass_kg, width_m=width_m, dimension=dimension,
                               points=points, box_widths=box_widths, tol=tol, seed=seed),
                          series, summary, _provenance(grid, kernel, units, None, seed))


def run_two_particle_contrast(mass_kg=1e-17, width_m=5e-7, points=128,
                              box_widths=32.0, dt=0.004, steps=1000,
                              record_every=20, seed=0):
    """Mean-field vs self-consistent two-body gravity: the centre of mass is
    free in the first case and self-gravitating in the second."""
    grid, units, kernel = _grid_and_units(mass_kg, width_m, 1, points, box_widths)
    x = grid.axis_coordinates()
    g = np.exp(-x**2 / 4.0)
    psi = np.outer(g, g).astype(np.complex128)
    from .states import TwoParticleWaveFunction
    state = TwoParticleWaveFunction.normalized(grid, psi)
    cfg = EvolutionConfig(dt=dt, steps=steps, kappa=units.kappa, kernel=kernel,
                          record_every=record_every)
    trace_lin, _ = evolve_two_particle(state, cfg, "linear_pairwise")
    trace_sn, _ = evolve_two_particle(state, cfg, "sn_selfconsistent")
    t = trace_lin["time"]
    w0 = trace_lin["com_width"][0]
    free_mass2 = np.sqrt(w0**2 + (t / (2.0 * 2.0 * w0)) ** 2)
    series = {"time": t,
              "com_width_pairwise": trace_lin["com_width"],
              "com_width_selfconsistent": trace_sn["com_width"],
              "com_width_free_mass2": free_mass2}
    summary = {
        "kappa": units.kappa,
        "final_com_width_pairwise_internal": float(trace_lin["com_width"][-1]),
        "final_com_width_selfconsistent_internal": float(trace_sn["com_width"][-1]),
        "final_com_width_free_mass2_internal": float(free_mass2[-1]),
        "com_width_estimator": "sqrt_variance_of_(x1+x2)/2",
    }
    return ScenarioResult("two_particle_contrast",
                          dict(mass_kg=mass_kg, width_m=width_m, points=points,
                               box_widths=box_widths, dt=dt, steps=steps,
                               record_every=record_every, seed=seed),
                          series, summary, _provenance(grid, kernel, units, dt, seed))


def run_collapse_lindblad(mass_kg=1e-17, width_m=5e-7, points=32, box_widths=16.0,
                          r0_m=5e-7, gamma=0.5, dt=0.01, steps=300,
                          record_every=5, seed=0):
    """Master-equation decoherence of a two-packet superposition under the
    smeared gravitational family (dimensionless coupling `gamma`)."""
    grid, units, kernel = _grid_and_units(mass_kg, width_m, 1, points, box_widths)
    cutoff = clp.CutoffSpec(r0_m)
    family = clp.diosi_operators(grid, cutoff, unit_system=units, gamma=gamma)
    ham = clp.kinetic_hamiltonian(grid)
    psi = two_packet_superposition(grid, width=1.0, separation=box_widths / 3.0)
    rho = DensityMatrix.from_state(psi)
    trace, rho_final = clp.evolve_lindblad(rho, family, ham, dt, steps, record_every)
    summary = {
        "gamma_internal": gamma,
        "gamma_si_value_per_unit": units.constants.G / (2.0 * math.pi**2 * units.constants.hbar),
        "cutoff_r0_internal": r0_m / width_m,
        "final_purity": float(trace["purity"][-1]),
        "initial_purity": float(trace["purity"][0]),
        "final_max_offdiagonal": float(trace["max_offdiagonal"][-1]),
        "trace_preservation_error": float(np.max(np.abs(trace["trace"] - 1.0))),
    }
    return ScenarioResult("collapse_lindblad",
                          dict(mass_kg=mass_kg, width_m=width_m, points=points,
                               box_widths=box_widths, r0_m=r0_m, gamma=gamma,
                               dt=dt, steps=steps, record_every=record_every, seed=seed),
                          {k: v for k, v in trace.items()}, summary,
                          _provenance(grid, kernel, units, dt, seed))


def run_collapse_sde(points=16, box_widths=16.0, weight_right=0.3, gamma=1.0,
                     dt=0.01, steps=800, ensemble=500, seed=20240801):
    """Born-rule demonstration: a two-outcome Hermitian collapse operator
    drives a superposition onto one of its eigenspaces; outcome frequencies
    follow the initial weights."""
    grid = Grid(dimension=1, points_per_axis=points, spacing=box_widths / points)
    x = grid.axis_coordinates()
    sign_op = np.where(x >= 0, 1.0, -1.0).astype(np.complex128)
    family = clp.LindbladFamily.from_operators(grid, [sign_op], gamma=gamma)
    centre = box_widths / 4.0
    left = np.exp(-((x + centre) ** 2) / 2.0)
    right = np.exp(-((x - centre) ** 2) / 2.0)
    h = grid.spacing
    left /= math.sqrt(np.sum(left**2) * h)
    right /= math.sqrt(np.sum(right**2) * h)
    psi = WaveFunction.normalized(
        grid, math.sqrt(1.0 - weight_right) * left + math.sqrt(weight_right) * right)

    cfg = clp.TrajectoryConfig(dt=dt, steps=steps, seed=seed, ensemble_size=ensemble)
    _, finals = clp.sse_ensemble(psi, family, None, cfg)
    sign_exp = np.sum(sign_op.real * np.abs(finals) ** 2, axis=1) * h
    resolved = np.abs(sign_exp) > 0.98
    n_plus = int(np.sum(sign_exp > 0.98))
    freq_plus = n_plus / ensemble
    sigma = math.sqrt(weight_right * (1.0 - weight_right) / ensemble)
    series = {"trajectory": np.arange(ensemble), "final_sign_expectation": sign_exp}
    summary = {
        "gamma_internal": gamma,
        "born_weight_right": weight_right,
        "observed_frequency_right": freq_plus,
        "binomial_sigma": sigma,
        "unresolved_fraction": float(1.0 - np.mean(resolved)),
        "outcome_estimator": "final_expectation_of_sign_operator_gt_0.98",
    }
    kernel = KernelSpec.default_for(grid)
    prov = _provenance(grid, kernel, None, dt, seed)
    return ScenarioResult("collapse_sde",
                          dict(points=points, box_widths=box_widths,
                               weight_right=weight_right, gamma=gamma, dt=dt, steps=steps,
                               ensemble=ensemble, seed=seed),
                          series, summary, prov)


def signalling_distance(mass_kg, d0_m, delta_d_m, v_m_per_s, s_m,
                        constants=CODATA2018):
    """Closed-form estimate of the minimum communication distance.

    Two branch packets separated by d0 travelling in parallel over a path s
    at speed v drift together by delta_d ~ G m s^2 / (2 v^2 d0^2).  For the
    gravitational shift to beat a light-speed signal the source distance
    must exceed S_min = c d0 sqrt(2 delta_d / (G m)).
    """
    for name, val in [("mass_kg", mass_kg), ("d0_m", d0_m), ("delta_d_m", delta_d_m),
                      ("v_m_per_s", v_m_per_s), ("s_m", s_m)]:
        if val <= 0:
            raise ValidationError(f"{name} must be positive, got {val}")
    g, c = constants.G, constants.c
    delta_d_predicted = g * mass_kg * s_m**2 / (2.0 * v_m_per_s**2 * d0_m**2)
    s_min = c * d0_m * math.sqrt(2.0 * delta_d_m / (g * mass_kg))
    return {
        "delta_d_predicted_m": delta_d_predicted,
        "s_min_m": s_min,
        "s_min_lightyears": s_min / METRES_PER_LIGHT_YEAR,
    }


def regime_classifier(mass_kg, sigma_m, radius_m, constants=CODATA2018):
    """Order-of-magnitude test for noticeable self-gravity of a wave packet.

    For a particle of size R and packet width sigma the deviation from
    linear dynamics becomes significant when m^3 sigma exceeds
    (planck mass)^3 (planck length) in the wide-packet regime R << sigma,
    or when m^3 sigma^2 / R exceeds it for R >> sigma.  The returned margin
    is the criterion quotient; 1 marks the boundary.
    """
    for name, val in [("mass_kg", mass_kg), ("sigma_m", sigma_m), ("radius_m", radius_m)]:
        if val <= 0:
            raise ValidationError(f"{name} must be positive, got {val}")
    threshold = constants.planck_mass**3 * constants.planck_length
    ratio = radius_m / sigma_m
    if ratio < 0.1:
        margin = mass_kg**3 * sigma_m / threshold
        return {"regime": "wide", "nonlinear": margin >= 1.0, "margin": margin}
    if ratio > 10.0:
        margin = mass_kg**3 * sigma_m**2 / (radius_m * threshold)
        return {"regime": "narrow", "nonlinear": margin >= 1.0, "margin": margin}
    return {"regime": "indeterminate", "nonlinear": None, "margin": math.nan}


def heating_table(mass_kg, r0_list_m, constants=CODATA2018):
    """Heating rates over a list of cutoff lengths, in W and K/s."""
    rows = []
    for r0 in r0_list_m:
        rate = clp.heating_rate(mass_kg, clp.CutoffSpec(r0), constants)
        rows.append({"r0_m": r0, "watts": rate.watts,
                     "kelvin_per_second": rate.kelvin_per_second})
    return rows
