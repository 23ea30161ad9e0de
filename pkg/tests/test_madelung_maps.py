import numpy as np
import pytest
from hypothesis import given, strategies as st

from madelung.density_geometry import (
    CotangentPoint,
    DensityFloorError,
    MetricScaling,
)
from madelung.field_core import ComplexField, PeriodicGrid, RealField
from madelung.madelung_maps import (
    AlgebraElement,
    GroupElement,
    Momentum,
    NotADiffeomorphismError,
    WindingError,
    algebra_bracket,
    bracket_sign,
    exp_algebra,
    group_action,
    infinitesimal_action,
    inverse_diffeomorphism,
    lie_poisson_defect,
    madelung_forward,
    madelung_inverse,
    madelung_tangent,
    momentum_gradient,
    momentum_hamiltonian,
    multicomponent_inverse,
    poisson_bracket,
    recover_theta,
    verify_momentum_map,
)
from madelung.sampling import random_cotangent_point, random_smooth_field, random_tangent, random_wave
from madelung.wave_geometry import hermitian

seeds = st.integers(0, 2**32 - 1)
gammas = st.floats(0.25, 4.0)


def element(grid, rng, band=4, amp=0.2):
    return AlgebraElement(random_smooth_field(grid, rng, band, amp), random_smooth_field(grid, rng, band, 1.0))


class TestForward:
    def test_constant_density(self, grid):
        p = CotangentPoint.gauged(RealField(grid, np.ones(grid.n)), RealField(grid, np.zeros(grid.n)))
        assert np.max(np.abs(madelung_forward(p).values - 1)) == 0

    @given(seed=seeds, gamma=gammas)
    def test_modulus_and_phase(self, seed, gamma):
        g = PeriodicGrid(64)
        p = random_cotangent_point(g, seed)
        psi = madelung_forward(p, MetricScaling(gamma=gamma))
        assert np.max(np.abs(np.abs(psi.values) ** 2 - p.rho.rho.values)) < 1e-14
        ratio = psi.values / madelung_forward(p).values
        assert np.max(np.abs(ratio - np.exp(1j * p.theta.values * (1 / (2 * gamma) - 0.5)))) < 1e-13

    @given(seed=seeds, gamma=gammas)
    def test_round_trip(self, seed, gamma):
        # small gamma multiplies the phase of psi, so use a finer grid
        g = PeriodicGrid(128)
        s = MetricScaling(gamma=gamma)
        p = random_cotangent_point(g, seed)
        q = recover_theta(madelung_inverse(madelung_forward(p, s)), s)
        assert np.max(np.abs(q.rho.rho.values - p.rho.rho.values)) < 1e-13
        assert np.max(np.abs(q.theta.values - p.theta.values)) < 1e-10

    @given(seed=seeds, gamma=gammas)
    def test_tangent_is_derivative(self, seed, gamma):
        g = PeriodicGrid(64)
        rng = np.random.default_rng(seed)
        s = MetricScaling(gamma=gamma)
        p = random_cotangent_point(g, rng)
        u = random_tangent(p, rng)
        h = 1e-5

        # oracle: the closed-form transform along the straight line, no re-gauging
        def at(t):
            rho = p.rho.rho.values + t * u.rho_dot.values
            theta = p.theta.values + t * u.theta_dot.values
            return np.sqrt(rho) * np.exp(1j * theta / (2 * gamma))

        fd = (at(h) - at(-h)) / (2 * h)
        assert np.max(np.abs(fd - madelung_tangent(p, u, s).values)) < 1e-8

    @given(seed=seeds)
    def test_tangent_is_horizontal(self, seed):
        g = PeriodicGrid(64)
        rng = np.random.default_rng(seed)
        p = random_cotangent_point(g, rng)
        w = madelung_tangent(p, random_tangent(p, rng))
        assert abs(np.real(hermitian(w.psi_dot, madelung_forward(p).psi))) < 1e-14


class TestInverse:
    def test_plane_wave(self, grid):
        psi = ComplexField(grid, np.exp(1j * grid.x))
        mom = madelung_inverse(psi)
        assert np.max(np.abs(mom.m.values - 2)) < 1e-13
        with pytest.raises(WindingError):
            recover_theta(mom)

    def test_vanishing_allowed(self, grid):
        mom = madelung_inverse(ComplexField(grid, np.sin(grid.x)))
        assert np.min(mom.rho.values) == pytest.approx(0, abs=1e-30)
        with pytest.raises(DensityFloorError):
            recover_theta(mom)

    def test_mass_checked(self, grid):
        mom = madelung_inverse(ComplexField(grid, 2 * np.ones(grid.n)))
        assert mom.mass == pytest.approx(4)
        with pytest.raises(ValueError):
            recover_theta(mom)

    def test_gauge_invariant(self, grid, rng):
        psi = random_wave(grid, rng)
        a = madelung_inverse(psi)
        b = madelung_inverse(ComplexField(grid, np.exp(0.4j) * psi.values))
        assert np.max(np.abs(a.m.values - b.m.values)) < 1e-13

    def test_negative_density_rejected(self, grid):
        with pytest.raises(ValueError):
            Momentum(RealField(grid, np.zeros(grid.n)), RealField(grid, -np.ones(grid.n)))

    def test_multicomponent(self, grid, rng):
        a, b = random_wave(grid, rng), random_wave(grid, rng)
        mom = multicomponent_inverse([a, b])
        assert np.max(np.abs(mom.m.values - madelung_inverse(a).m.values - madelung_inverse(b).m.values)) < 1e-13
        assert len(mom.components) == 2

    def test_csv(self, tmp_path, grid, rng):
        mom = multicomponent_inverse([random_wave(grid, rng), random_wave(grid, rng)])
        mom.to_csv(tmp_path / "m.csv")
        data = np.loadtxt(tmp_path / "m.csv", delimiter=",", skiprows=1)
        assert data.shape == (grid.n, 5)
        assert open(tmp_path / "m.csv").readline().strip() == "x,m,rho,rho_0,rho_1"


class TestGroupAction:
    def test_not_a_diffeomorphism(self, grid):
        with pytest.raises(NotADiffeomorphismError):
            GroupElement(RealField(grid, 1.5 * np.sin(grid.x)), RealField(grid, np.zeros(grid.n)))

    def test_inverse_diffeomorphism(self, grid):
        d = 0.4 * np.sin(grid.x)
        xinv, jac = inverse_diffeomorphism(RealField(grid, d))
        assert np.max(np.abs(xinv + 0.4 * np.sin(xinv) - grid.x)) < 1e-13
        assert np.max(np.abs(jac - (1 + 0.4 * np.cos(xinv)))) < 1e-13

    def test_identity(self, grid, rng):
        psi = random_wave(grid, rng)
        assert np.max(np.abs(group_action(GroupElement.identity(grid), psi).values - psi.values)) == 0

    def test_pure_phase(self, grid, rng):
        psi = random_wave(grid, rng)
        a = RealField(grid, np.cos(grid.x))
        out = group_action(GroupElement(RealField(grid, np.zeros(grid.n)), a), psi)
        assert np.max(np.abs(out.values - np.exp(-0.5j * a.values) * psi.values)) < 1e-15

    def test_translation(self, grid):
        # a constant displacement shifts the argument
        psi = ComplexField(grid, np.exp(np.cos(grid.x)) + 0j)
        g = GroupElement(RealField(grid, 0.3 * np.ones(grid.n)), RealField(grid, np.zeros(grid.n)))
        assert np.max(np.abs(group_action(g, psi).values - np.exp(np.cos(grid.x - 0.3)))) < 1e-12

    @given(seed=seeds)
    def test_unitary(self, seed):
        g = PeriodicGrid(128)
        rng = np.random.default_rng(seed)
        psi = random_wave(g, rng, 4, 0.5)
        # the pulled-back field is not band-limited; a gentle phi keeps it resolved
        elem = GroupElement(random_smooth_field(g, rng, 4, 0.1), random_smooth_field(g, rng, 4, 1.0))
        out = group_action(elem, psi)
        assert np.mean(np.abs(out.values) ** 2) == pytest.approx(np.mean(np.abs(psi.values) ** 2), rel=1e-10)

    @given(seed=seeds)
    def test_generator(self, seed):
        g = PeriodicGrid(64)
        rng = np.random.default_rng(seed)
        psi = random_wave(g, rng, 4, 0.5)
        xi = element(g, rng)
        h = 1e-4
        fd = (group_action(exp_algebra(xi, h), psi).values - group_action(exp_algebra(xi, -h), psi).values) / (2 * h)
        assert np.max(np.abs(fd - infinitesimal_action(xi, psi).values)) < 1e-6

    def test_component_mismatch(self, grid, rng):
        g = GroupElement(RealField(grid, np.zeros(grid.n)),
                         (RealField(grid, np.zeros(grid.n)),) * 3)
        with pytest.raises(ValueError):
            group_action(g, [random_wave(grid, rng), random_wave(grid, rng)])


class TestMomentumMap:
    def test_hamiltonian_pairing(self, grid, rng):
        psi = random_wave(grid, rng)
        xi = element(grid, rng)
        mom = madelung_inverse(psi)
        ref = np.mean(mom.rho.values * xi.alpha.values + mom.m.values * xi.v.values)
        assert momentum_hamiltonian(psi, xi) == pytest.approx(ref, abs=1e-14)

    @given(seed=seeds)
    def test_closed_matches_fd(self, seed):
        g = PeriodicGrid(32)
        rng = np.random.default_rng(seed)
        psi = random_wave(g, rng, 4, 0.5)
        xi = element(g, rng, band=4)
        a = momentum_gradient(psi, xi, "closed").values
        b = momentum_gradient(psi, xi, "fd").values
        assert np.max(np.abs(a - b)) < 1e-7

    @given(seed=seeds)
    def test_momentum_map_identity(self, seed):
        g = PeriodicGrid(64)
        rng = np.random.default_rng(seed)
        psi = random_wave(g, rng, 6, 0.5)
        assert verify_momentum_map(psi, element(g, rng, 6)) < 1e-11

    def test_unknown_method(self, grid, rng):
        with pytest.raises(ValueError):
            momentum_gradient(random_wave(grid, rng), element(grid, rng), "magic")

    def test_multicomponent_identity(self, grid, rng):
        psis = [random_wave(grid, rng), random_wave(grid, rng)]
        xi = AlgebraElement(random_smooth_field(grid, rng, 4, 0.2),
                            (random_smooth_field(grid, rng), random_smooth_field(grid, rng)))
        assert verify_momentum_map(psis, xi) < 1e-11

    def test_poisson_bracket_antisymmetric(self, grid, rng):
        a, b = random_wave(grid, rng), random_wave(grid, rng)
        assert poisson_bracket(a, b) == pytest.approx(-poisson_bracket(b, a), abs=1e-14)
        assert abs(poisson_bracket(a, a)) < 1e-15


class TestBracket:
    def test_sign_calibration(self, grid):
        assert bracket_sign(grid) in (1, -1)
        assert bracket_sign(grid) == bracket_sign(PeriodicGrid(64))

    @given(seed=seeds)
    def test_antisymmetric(self, seed):
        g = PeriodicGrid(64)
        rng = np.random.default_rng(seed)
        xi, eta = element(g, rng), element(g, rng)
        a, b = algebra_bracket(xi, eta), algebra_bracket(eta, xi)
        assert np.max(np.abs(a.v.values + b.v.values)) < 1e-13
        assert np.max(np.abs(a.alpha.values + b.alpha.values)) < 1e-13

    def test_vector_field_part(self, grid):
        x = grid.x
        xi = AlgebraElement(RealField(grid, np.ones(grid.n)), RealField(grid, np.zeros(grid.n)))
        eta = AlgebraElement(RealField(grid, np.sin(x)), RealField(grid, np.cos(x)))
        br = algebra_bracket(xi, eta)
        assert np.max(np.abs(br.v.values - np.cos(x))) < 1e-13
        assert np.max(np.abs(br.alpha.values + np.sin(x))) < 1e-13

    @given(seed=seeds)
    def test_equivariance(self, seed):
        g = PeriodicGrid(64)
        rng = np.random.default_rng(seed)
        psi = random_wave(g, rng, 6, 0.5)
        assert lie_poisson_defect(psi, element(g, rng, 6), element(g, rng, 6)) < 1e-10
