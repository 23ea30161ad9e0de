import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from madelung.density_geometry import DensityFloorError
from madelung.dynamics import (
    CompressibleState,
    InternalEnergy2,
    compressible2_evolve,
    fluid_hamiltonian,
    spinor_evolve,
    spinor_hamiltonian,
)
from madelung.dynamics.compressible import compressible_rhs, spinor_potentials
from madelung.field_core import PeriodicGrid, RealField
from madelung.sampling import random_smooth_field

seeds = st.integers(0, 2**32 - 1)
U = InternalEnergy2.quadratic(1.0, 0.8, 0.3, 1.0, 0.5)


def random_state(grid, seed):
    rng = np.random.default_rng(seed)
    f = [random_smooth_field(grid, rng, 4) for _ in range(4)]
    return CompressibleState.gauged(1 + 0.3 * f[0], 0.5 + 0.15 * f[1], 0.5 * f[2], 0.5 * f[3])


def test_energy_partials_checked():
    with pytest.raises(ValueError):
        InternalEnergy2(lambda r, s: r * s, lambda r, s: s, lambda r, s: 0 * r)


def test_quadratic_minimum():
    assert U.u(1.0, 0.5) == 0 and U.u_rho(1.0, 0.5) == 0 and U.u_varsigma(1.0, 0.5) == 0


@given(seed=seeds)
def test_hamiltonians_differ_by_four(seed):
    s = random_state(PeriodicGrid(64), seed)
    assert fluid_hamiltonian(s, U) == pytest.approx(4 * spinor_hamiltonian(s.spinor(), U), abs=1e-12)


@settings(max_examples=10)
@given(seed=seeds)
def test_fluid_rhs_is_spinor_image(seed):
    # oracle: time derivatives of modulus and phase under the spinor equations
    g = PeriodicGrid(128)
    s = random_state(g, seed)
    f1, f2 = (p.values for p in s.spinor())
    q1, q2 = spinor_potentials(g, f1, f2, U)
    rates = []
    for f, q in ((f1, q1), (f2, q2)):
        ft = -1j * (-g.diff(f, 2) + q * f)
        rates.append((2 * np.real(np.conj(f) * ft), 2 * np.imag(ft / f)))
    got = compressible_rhs(g, U)(0.0, tuple(x.values for x in (s.rho, s.varsigma, s.theta, s.tau)))
    for have, want in zip(got, (rates[0][0], rates[1][0], rates[0][1], rates[1][1])):
        assert np.max(np.abs(have - want)) < 1e-8


def test_equilibrium(grid):
    one = RealField(grid, np.ones(grid.n))
    zero = RealField(grid, np.zeros(grid.n))
    s = CompressibleState(one, one * 0.5, zero, zero)
    tr = compressible2_evolve(s, U, 1e-2, 0.1)
    assert np.max(np.abs(tr.final.rho.values - 1)) == 0
    sp = spinor_evolve(*s.spinor(), U, 1e-2, 0.1)
    assert np.max(np.abs(np.abs(sp.final[1].values) ** 2 - 0.5)) < 1e-14


def test_fluid_tracks_spinor(grid):
    s0 = random_state(grid, 5)
    sp = spinor_evolve(*s0.spinor(), U, 1e-4, 0.02)
    ref = dict(zip(np.round(sp.times, 12), sp.states))
    tr = compressible2_evolve(s0, U, 1e-4, 0.02,
                              reference=lambda t: tuple(c.values for c in ref[round(t, 12)]))
    assert tr.column("correspondence_defect").max() < 1e-5
    for traj in (tr, sp):
        assert traj.drift("norm_or_mass") < 1e-12
        assert traj.drift("varsigma_mass") < 1e-12
    assert tr.drift("hamiltonian", relative=True) < 1e-6


def test_floor(grid):
    s = random_state(grid, 1)
    bad = CompressibleState(s.rho, RealField(grid, np.zeros(grid.n)), s.theta, s.tau)
    with pytest.raises(DensityFloorError):
        bad.spinor()
    with pytest.raises(DensityFloorError):
        compressible2_evolve(bad, U, 1e-3, 1e-3)


def test_csv(grid, tmp_path):
    random_state(grid, 2).to_csv(tmp_path / "s.csv")
    assert open(tmp_path / "s.csv").readline().strip() == "x,rho,varsigma,theta,tau"
