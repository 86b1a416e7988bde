"""Shared fixtures.  The expensive 3D imaginary-time solves and the big
stochastic ensembles are session-scoped so the module tests and the
acceptance suite reuse one computation.
"""

import numpy as np
import pytest

from snlab import Grid, KernelSpec
from snlab.dynamics import ground_state

import oracles


@pytest.fixture(scope="session")
def shooting_kappa1():
    out = oracles.shooting_ground_state(1.0)
    assert out["virial_residual"] < 1e-6
    assert out["eigen_residual"] < 1e-6
    return out


@pytest.fixture(scope="session")
def shooting_kappa2():
    out = oracles.shooting_ground_state(2.0)
    assert out["virial_residual"] < 1e-6
    assert out["eigen_residual"] < 1e-6
    return out


@pytest.fixture(scope="session")
def soliton_kappa2_64():
    """kappa = 2 stationary state on the 64^3 production grid."""
    grid = Grid(dimension=3, points_per_axis=64, spacing=0.7)
    kernel = KernelSpec.newtonian(truncated=True)
    state, info = ground_state(grid, kappa=2.0, kernel=kernel, return_info=True)
    return {"grid": grid, "kernel": kernel, "state": state, "info": info, "kappa": 2.0}


@pytest.fixture(scope="session")
def soliton_kappa1_48():
    """kappa = 1 stationary state on a coarse wide box (rescaling partner)."""
    grid = Grid(dimension=3, points_per_axis=48, spacing=1.4)
    kernel = KernelSpec.newtonian(truncated=True)
    state, info = ground_state(grid, kappa=1.0, kernel=kernel, return_info=True)
    return {"grid": grid, "kernel": kernel, "state": state, "info": info, "kappa": 1.0}


@pytest.fixture(scope="session")
def born_ensemble():
    """2000-trajectory Born-rule run (H = 0, two-outcome collapse operator)."""
    from snlab.scenarios import run_collapse_sde
    return run_collapse_sde(points=16, box_widths=16.0, weight_right=0.3,
                            gamma=1.0, dt=0.01, steps=800, ensemble=2000,
                            seed=777001)


@pytest.fixture(scope="session")
def ensemble_vs_lindblad():
    """2000 diffusive trajectories against the master equation, 16 sites."""
    from snlab.collapse import (CutoffSpec, TrajectoryConfig, diosi_operators,
                                kinetic_hamiltonian, lindblad_step, sse_ensemble)
    from snlab.states import DensityMatrix, two_packet_superposition

    grid = Grid(dimension=1, points_per_axis=16, spacing=1.0)
    family = diosi_operators(grid, CutoffSpec(2.0), gamma=1.5)
    ham = kinetic_hamiltonian(grid)
    psi = two_packet_superposition(grid, width=1.5, separation=8.0)
    dt, steps, n_traj = 0.005, 200, 2000
    cfg = TrajectoryConfig(dt=dt, steps=steps, seed=31415, ensemble_size=n_traj)
    rho_mean, _ = sse_ensemble(psi, family, ham, cfg)
    rho = DensityMatrix.from_state(psi)
    for _ in range(steps):
        rho = lindblad_step(rho, family, ham, dt)
    return rho_mean, rho.matrix, n_traj


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20250810)
