"""Acceptance suite: one test per release criterion, each at its stated
tolerance.  Run with `pytest tests/test_acceptance.py -v -s` to get one
PASS line per criterion.
"""

import math

import numpy as np
import pytest
from scipy import fft as sfft

from snlab import (EvolutionConfig, Grid, KernelSpec, TwoParticleWaveFunction,
                   WaveFunction, evolve, gaussian_packet, norm)
from snlab.collapse import diosi_operators, drift_decomposition
from snlab.diagnostics import diagnostics
from snlab.dynamics import step_sn, step_spinor
from snlab.scenarios import (run_self_focus, run_stern_gerlach,
                             run_two_packet, run_two_particle_contrast,
                             signalling_distance)
from snlab.spectral import kernel_symbol, kspace_nonlinear_term, potential_from_density
from snlab.states import SpinorWaveFunction
from snlab.two_particle import step_two_particle
from snlab.units import CODATA2018

import oracles


def report(name, detail):
    print(f"\nACCEPTANCE {name}: PASS ({detail})")


# 1 ---------------------------------------------------------------------------

def test_criterion_free_evolution_oracle():
    """kappa = 0 width trace vs the closed-form law, 1e-4 over 10 t_char."""
    grid = Grid(dimension=1, points_per_axis=1024, spacing=0.1)
    st = gaussian_packet(grid, width=1.0)
    cfg = EvolutionConfig(dt=0.05, steps=400, kappa=0.0,
                          kernel=KernelSpec.softened(0.2), record_every=10,
                          mode="free")
    records, _ = evolve(st, cfg)
    t = np.array([r.time for r in records])
    w = np.array([r.width for r in records])
    dev = np.max(np.abs(w - oracles.free_gaussian_width(t, 1.0))
                 / oracles.free_gaussian_width(t, 1.0))
    assert dev < 1e-4
    report("free-evolution oracle", f"max relative deviation {dev:.2e}")


# 2 ---------------------------------------------------------------------------

def test_criterion_conservation_suite():
    """Norm drift <= 1e-10/step and energy drift <= 1e-4/run for the scalar,
    spinor and two-particle solvers."""
    # scalar, 1D
    grid = Grid(dimension=1, points_per_axis=512, spacing=0.2)
    kern = KernelSpec.softened(0.4)
    cfg = EvolutionConfig(dt=0.002, steps=600, kappa=3.0, kernel=kern)
    st = gaussian_packet(grid, width=1.0)
    cur, norms, energies = st, [], []
    for i in range(cfg.steps):
        cur = step_sn(cur, cfg, step_index=i)
        norms.append(norm(cur))
        energies.append(diagnostics(cur, kappa=3.0, kernel=kern).total_energy
                        if i % 60 == 0 else None)
    scalar_norm_drift = np.max(np.abs(np.diff([1.0] + norms)))
    e = [v for v in energies if v is not None]
    scalar_energy_drift = np.max(np.abs(np.array(e) - e[0])) / abs(e[0])
    assert scalar_norm_drift < 1e-10
    assert scalar_energy_drift < 1e-4

    # spinor, shared coupling
    x = grid.axis_coordinates()
    phi = gaussian_packet(grid, width=1.0).amplitudes
    sp = SpinorWaveFunction.normalized(grid, phi * np.exp(1j * x), phi * np.exp(-1j * x))
    k2 = grid.k_squared()
    neg_sym = -cfg.kappa * kernel_symbol(kern, grid)

    def spinor_energy(s):
        kin = 0.0
        for comp in (s.plus, s.minus):
            ck = sfft.fftn(comp)
            kin += float(np.sum(0.5 * k2 * np.abs(ck) ** 2) * grid.cell_volume / grid.size)
        rho = s.total_density()
        phi_tot = sfft.irfftn(sfft.rfftn(rho) * neg_sym[: grid.points_per_axis // 2 + 1],
                              s=grid.shape)
        return kin + 0.5 * float(np.sum(phi_tot * rho) * grid.cell_volume)

    cur, norms, energies = sp, [], [spinor_energy(sp)]
    for i in range(400):
        cur = step_spinor(cur, cfg, "shared", step_index=i)
        norms.append(cur.total_norm())
        if i % 40 == 39:
            energies.append(spinor_energy(cur))
    spinor_norm_drift = np.max(np.abs(np.diff([1.0] + norms)))
    energies = np.array(energies)
    spinor_energy_drift = np.max(np.abs(energies - energies[0])) / abs(energies[0])
    assert spinor_norm_drift < 1e-10
    assert spinor_energy_drift < 1e-4

    # two-particle, self-consistent coupling
    grid2 = Grid(dimension=1, points_per_axis=128, spacing=0.25)
    kern2 = KernelSpec.softened(0.5)
    cfg2 = EvolutionConfig(dt=0.004, steps=400, kappa=3.0, kernel=kern2)
    g = np.exp(-grid2.axis_coordinates() ** 2 / 4.0)
    tp = TwoParticleWaveFunction.normalized(grid2, np.outer(g, g))
    k1d = grid2.axis_wavenumbers() ** 2
    neg_sym2 = -cfg2.kappa * kernel_symbol(kern2, grid2)

    def two_particle_energy(s):
        ck = sfft.fft2(s.amplitudes)
        kin = float(np.sum(0.5 * (k1d[:, None] + k1d[None, :]) * np.abs(ck) ** 2)
                    * grid2.spacing**2 / grid2.size**2)
        r1, r2 = s.marginal_densities()
        rho_t = r1 + r2
        phi_t = sfft.irfftn(sfft.rfftn(rho_t) * neg_sym2[: grid2.points_per_axis // 2 + 1],
                            s=(grid2.points_per_axis,))
        return kin + 0.5 * float(np.sum(phi_t * rho_t) * grid2.spacing)

    cur, norms, energies = tp, [], [two_particle_energy(tp)]
    for i in range(cfg2.steps):
        cur = step_two_particle(cur, cfg2, "sn_selfconsistent", step_index=i)
        norms.append(cur.total_norm())
        if i % 40 == 39:
            energies.append(two_particle_energy(cur))
    tp_norm_drift = np.max(np.abs(np.diff([1.0] + norms)))
    energies = np.array(energies)
    tp_energy_drift = np.max(np.abs(energies - energies[0])) / abs(energies[0])
    assert tp_norm_drift < 1e-10
    assert tp_energy_drift < 1e-4

    report("conservation suite",
           f"norm drifts {scalar_norm_drift:.1e}/{spinor_norm_drift:.1e}/{tp_norm_drift:.1e}, "
           f"energy drifts {scalar_energy_drift:.1e}/{spinor_energy_drift:.1e}/{tp_energy_drift:.1e}")


# 3 ---------------------------------------------------------------------------

def test_criterion_kernel_equivalence():
    """Mode-sum vs convolution route, 100 random states on 32^3, <= 1e-8."""
    grid = Grid(dimension=3, points_per_axis=32, spacing=0.5)
    kern = KernelSpec.newtonian()
    rng = np.random.default_rng(411)
    worst = 0.0
    for _ in range(100):
        amp = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        st = WaveFunction.normalized(grid, amp)
        via_modes = kspace_nonlinear_term(st, kappa=2.2)
        via_conv = potential_from_density(st.density(), kern, 2.2, grid) * st.amplitudes
        worst = max(worst, np.linalg.norm(via_modes - via_conv)
                    / np.linalg.norm(via_conv))
    assert worst < 1e-8
    report("kernel equivalence", f"worst relative L2 distance {worst:.2e}")


# 4 ---------------------------------------------------------------------------

def test_criterion_ground_state(soliton_kappa2_64, soliton_kappa1_48, shooting_kappa2):
    """Virial 1 +- 1e-2, shooting-oracle energy within 1e-3, rescaling 1e-3."""
    rec2 = diagnostics(soliton_kappa2_64["state"], kernel=soliton_kappa2_64["kernel"],
                       kappa=2.0)
    energy_dev = abs(rec2.total_energy - shooting_kappa2["total_energy"]) \
        / abs(shooting_kappa2["total_energy"])
    virial = 2.0 * rec2.kinetic_energy / abs(rec2.gravitational_energy)
    rec1 = diagnostics(soliton_kappa1_48["state"], kernel=soliton_kappa1_48["kernel"],
                       kappa=1.0)
    energy_cov = abs(rec2.total_energy / 4.0 / rec1.total_energy - 1.0)
    width_cov = abs(2.0 * rec2.width / rec1.width - 1.0)
    assert energy_dev < 1e-3
    assert abs(virial - 1.0) < 1e-2
    assert energy_cov < 1e-3
    assert width_cov < 1e-3
    report("ground state", f"energy dev {energy_dev:.2e}, virial {virial:.5f}, "
           f"rescaling devs {energy_cov:.2e}/{width_cov:.2e}")


# 5 ---------------------------------------------------------------------------

def test_criterion_section3_qualitative():
    """Self-focusing and two-packet attraction with the centre of mass pinned
    to the midpoint (<= 1e-9) through the approach phase."""
    focus = run_self_focus(points=256, box_widths=16.0, dt=0.004, steps=400,
                           record_every=40)
    assert focus.summary["final_width_sn_internal"] < focus.summary["final_width_free_internal"]

    packets = run_two_packet(points=768, box_widths=96.0, separation_widths=6.0,
                             dt=0.004, steps=2600, record_every=26)
    sep = packets.series["separation"]
    com_dev = packets.summary["max_abs_com_approach_internal"]
    assert sep[int(np.argmin(sep))] < sep[0]
    assert np.min(sep) < 0.5 * sep[0]          # genuine attraction, not jitter
    assert com_dev < 1e-9
    report("section-3 qualitative claims",
           f"width ratio {focus.summary['final_width_ratio']:.3f}, "
           f"separation {sep[0]:.1f}->{np.min(sep):.2f}, com dev {com_dev:.1e}")


# 6 ---------------------------------------------------------------------------

def test_criterion_stern_gerlach():
    """Shared coupling lands strictly inside the eigenstate deflection; the
    two coincide to 1e-8 when the coupling vanishes."""
    res = run_stern_gerlach(points=256, box_widths=32.0, travel_widths=6.0,
                            dt=0.01, record_every=60)
    d = res.summary["deflection_separate_internal"]
    d_prime = res.summary["deflection_shared_internal"]
    assert d_prime < d

    free = run_stern_gerlach(mass_kg=1e-30, points=256, box_widths=32.0,
                             travel_widths=6.0, dt=0.01, record_every=60)
    gap0 = abs(free.summary["deflection_gap_internal"])
    assert gap0 < 1e-8
    report("stern-gerlach splitting",
           f"d={d:.4f}, d'={d_prime:.4f}, zero-coupling gap {gap0:.1e}")


# 7 ---------------------------------------------------------------------------

def test_criterion_signalling_numbers():
    out = signalling_distance(mass_kg=10000 * CODATA2018.atomic_mass_unit,
                              d0_m=1e-6, delta_d_m=1e-6, v_m_per_s=100.0, s_m=1.0)
    ly = out["s_min_lightyears"]
    assert 0.65 < ly < 2.0
    report("signalling distance", f"S_min = {ly:.3f} light-years")


# 8 ---------------------------------------------------------------------------

def test_criterion_heating_numbers():
    from snlab.collapse import CutoffSpec, heating_rate
    proton = 1.67262192369e-27
    small = heating_rate(proton, CutoffSpec(1e-15)).kelvin_per_second
    large = heating_rate(proton, CutoffSpec(1e-7)).kelvin_per_second
    assert 1e-5 < small < 1e-3
    assert 1e-29 < large < 1e-27
    ratio = heating_rate(proton, CutoffSpec(1e-12)).watts \
        / heating_rate(proton, CutoffSpec(1e-11)).watts
    assert ratio == pytest.approx(1000.0, rel=1e-6)
    gamma, r0 = 0.3, 2.0
    oracle_dev = abs(oracles.trace_heating_rate_1d(1024, 0.5, r0, gamma)
                     - oracles.closed_form_heating_1d(r0, gamma)) \
        / oracles.closed_form_heating_1d(r0, gamma)
    assert oracle_dev < 0.05
    report("heating rates", f"{small:.2e} K/s and {large:.2e} K/s, "
           f"cube-law ratio {ratio:.6f}, trace-oracle dev {oracle_dev:.1%}")


# 9 ---------------------------------------------------------------------------

def test_criterion_collapse_equivalence(ensemble_vs_lindblad, born_ensemble):
    rho_mean, rho_master, n_traj = ensemble_vs_lindblad
    delta = rho_mean - rho_master
    trace_norm = float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (delta + delta.conj().T)))))
    assert trace_norm <= 5.0 / math.sqrt(n_traj)

    s = born_ensemble.summary
    p = s["born_weight_right"]
    n = born_ensemble.parameters["ensemble"]
    sigma = math.sqrt(p * (1 - p) / n)
    born_dev = abs(s["observed_frequency_right"] - p)
    assert born_dev <= 3.0 * sigma
    report("collapse equivalence",
           f"trace-norm distance {trace_norm:.4f} <= {5/math.sqrt(n_traj):.4f}, "
           f"Born deviation {born_dev:.4f} <= {3*sigma:.4f}")


# 10 --------------------------------------------------------------------------

def test_criterion_drift_decomposition():
    grid = Grid(dimension=3, points_per_axis=16, spacing=0.5)
    st = gaussian_packet(grid, width=1.0)
    kappa = 2.0
    family = diosi_operators(grid, cutoff=None, gamma=kappa / (2.0 * math.pi**2))
    parts = drift_decomposition(st, family)
    ratio_dev = abs(parts["sn_coefficient_ratio"] - 1.0)
    conv = -1j * kspace_nonlinear_term(st, kappa)
    route_dev = np.linalg.norm(parts["sn_term"] - conv) / np.linalg.norm(conv)
    assert ratio_dev < 1e-10
    assert route_dev < 1e-8
    report("drift decomposition",
           f"coefficient ratio dev {ratio_dev:.1e}, route dev {route_dev:.1e}")


# 11 --------------------------------------------------------------------------

def test_criterion_two_particle_contrast():
    # t = 3.2: long enough for a clear contrast, short enough that the
    # ejecta accelerated by the pair well cannot wrap the periodic box
    res = run_two_particle_contrast(points=128, box_widths=32.0, dt=0.004,
                                    steps=800, record_every=80)
    s = res.summary
    free_dev = abs(s["final_com_width_pairwise_internal"]
                   / s["final_com_width_free_mass2_internal"] - 1.0)
    assert free_dev < 1e-3
    assert s["final_com_width_selfconsistent_internal"] < s["final_com_width_pairwise_internal"]
    report("two-particle contrast",
           f"pairwise vs free mass-2 dev {free_dev:.2e}, "
           f"self-consistent width {s['final_com_width_selfconsistent_internal']:.4f} "
           f"< pairwise {s['final_com_width_pairwise_internal']:.4f}")


# 12 --------------------------------------------------------------------------

def test_criterion_determinism(tmp_path):
    from snlab import cli
    args = ["evolve", "--seed", "21", "--set", "points=128", "--set", "steps=60",
            "--set", "record_every=20", "--set", "box_widths=12.0"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    same = (a / "summary.txt").read_bytes() == (b / "summary.txt").read_bytes()
    assert same
    assert (a / "timeseries.csv").read_bytes() == (b / "timeseries.csv").read_bytes()
    report("determinism", "byte-identical summary and time series on rerun")
