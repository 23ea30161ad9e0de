import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from madelung.density_geometry import CotangentPoint, DensityFloorError
from madelung.dynamics.hydro import QUANTUM_PRESSURE_COEFF, hydro_rhs
from madelung.dynamics import (
    Nonlinearity,
    NLSParams,
    hydro_evolve,
    hydro_hamiltonian,
    nls_evolve,
    nls_hamiltonian,
)
from madelung.field_core import PeriodicGrid, RealField
from madelung.madelung_maps import madelung_forward
from madelung.sampling import random_cotangent_point

seeds = st.integers(0, 2**32 - 1)


def test_pressure_coefficient():
    assert QUANTUM_PRESSURE_COEFF == 2.0


@given(seed=seeds)
def test_hamiltonians_agree(seed):
    g = PeriodicGrid(64)
    p = random_cotangent_point(g, seed)
    par = NLSParams(Nonlinearity.cubic(0.7), RealField(g, np.cos(g.x)))
    assert hydro_hamiltonian(p, par) == pytest.approx(nls_hamiltonian(madelung_forward(p), par), abs=1e-12)


@settings(max_examples=10)
@given(seed=seeds)
def test_rhs_is_madelung_image_of_nls(seed):
    # oracle: d/dt of |psi|^2 and of the phase under i psi_t = -psi'' + f psi
    g = PeriodicGrid(128)
    p = random_cotangent_point(g, seed, 4, 0.3, 0.5)
    par = NLSParams(Nonlinearity.cubic(1.0))
    psi = madelung_forward(p).values
    psi_t = -1j * (-g.diff(psi, 2) + np.abs(psi) ** 2 * psi)
    rho_t = 2 * np.real(np.conj(psi) * psi_t)
    theta_t = 2 * np.imag(psi_t / psi)
    got_rho, got_theta = hydro_rhs(g, par, dealias=False)(0.0, (p.rho.rho.values, p.theta.values))
    assert np.max(np.abs(got_rho - rho_t)) < 1e-9
    assert np.max(np.abs(got_theta - theta_t)) < 1e-9


def test_steady_state(grid):
    p = CotangentPoint.gauged(RealField(grid, np.ones(grid.n)), RealField(grid, np.zeros(grid.n)))
    tr = hydro_evolve(p, NLSParams(Nonlinearity.quartic()), 1e-3, 0.1)
    assert np.max(np.abs(tr.final.rho.rho.values - 1)) == 0


def test_tracks_nls(grid):
    p = random_cotangent_point(grid, 11, 4, 0.3, 0.5)
    par = NLSParams(Nonlinearity.cubic(1.0))
    nls = nls_evolve(madelung_forward(p), par, 1e-4, 0.1)
    ref = dict(zip(np.round(nls.times, 12), nls.states))
    tr = hydro_evolve(p, par, 1e-4, 0.1, reference=lambda t: ref[round(t, 12)].values)
    assert tr.column("correspondence_defect").max() < 1e-6
    assert tr.drift("norm_or_mass") < 1e-12
    assert tr.drift("hamiltonian", relative=True) < 1e-6


def test_floor_breach(grid):
    # a deep density well under a strong attractive flow collapses
    rho = 1 + 0.999 * np.cos(grid.x)
    p = CotangentPoint.gauged(RealField(grid, rho), RealField(grid, 3 * np.sin(grid.x)))
    with pytest.raises(DensityFloorError, match="t="):
        hydro_evolve(p, NLSParams(), 1e-3, 1.0)
