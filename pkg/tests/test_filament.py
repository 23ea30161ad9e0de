import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from madelung.dynamics import (
    ClosedCurve3D,
    ImmersionError,
    Nonlinearity,
    NLSParams,
    TorsionWindingError,
    filament_evolve,
    frenet,
    hasimoto,
    nls_evolve,
    willmore_energy,
)
from madelung.field_core import PeriodicGrid, RealField


class TestCurve:
    def test_shape_checked(self):
        with pytest.raises(ValueError):
            ClosedCurve3D(PeriodicGrid(16), np.zeros((2, 16)))

    def test_immersion(self):
        with pytest.raises(ImmersionError):
            ClosedCurve3D(PeriodicGrid(16), np.ones((3, 16)))

    def test_circle(self):
        c = ClosedCurve3D.circle(64, 2.0)
        assert c.length() == pytest.approx(4 * np.pi)
        assert c.arclength_defect() < 1e-13

    @given(eps=st.floats(0.0, 0.1), mode=st.integers(1, 3))
    @settings(max_examples=10)
    def test_reparametrize(self, eps, mode):
        raw = ClosedCurve3D.perturbed_circle(128, eps, mode, arclength=False)
        c = raw.reparametrize_arclength()
        assert c.arclength_defect() < 1e-10
        assert c.length() == pytest.approx(raw.length(), rel=1e-12)
        assert np.max(np.abs(c.points[:, 0] - raw.points[:, 0])) < 1e-12

    def test_drift_curves_not_resampled(self):
        with pytest.raises(ValueError):
            ClosedCurve3D.helix(32).reparametrize_arclength()

    def test_csv_includes_drift(self, tmp_path):
        c = ClosedCurve3D.helix(32, 1.0, 0.5)
        c.to_csv(tmp_path / "h.csv")
        z = np.loadtxt(tmp_path / "h.csv", delimiter=",", skiprows=1)[:, 2]
        assert np.allclose(z, 0.5 * c.grid.x)


class TestFrenet:
    def test_circle(self):
        fr = frenet(ClosedCurve3D.circle(64, 2.0))
        assert np.allclose(fr.k.values, 0.5, atol=1e-13)
        assert np.allclose(fr.tau.values, 0.0, atol=1e-13)
        assert not fr.degenerate

    @pytest.mark.parametrize("a,b", [(1.0, 0.5), (2.0, 1.0), (0.5, 2.0)])
    def test_helix(self, a, b):
        fr = frenet(ClosedCurve3D.helix(64, a, b))
        assert np.allclose(fr.k.values, a / (a * a + b * b), atol=1e-12)
        assert np.allclose(fr.tau.values, b / (a * a + b * b), atol=1e-12)

    def test_degenerate_flag(self):
        g = PeriodicGrid(64)
        # a huge circle has curvature below the floor
        c = ClosedCurve3D.from_function(g, lambda x: 1e7 * np.array([np.cos(x), np.sin(x), 0 * x]))
        assert frenet(c).degenerate

    def test_willmore_circle(self):
        assert willmore_energy(ClosedCurve3D.circle(64, 2.0)) == pytest.approx(np.pi)


class TestHasimoto:
    def test_circle(self):
        fr = frenet(ClosedCurve3D.circle(64, 1.0))
        psi = hasimoto(fr.k, fr.tau)
        assert np.allclose(psi.values, 1.0)

    def test_full_turn_of_torsion(self):
        g = PeriodicGrid(64)
        psi = hasimoto(RealField(g, np.ones(64)), RealField(g, np.ones(64)))
        assert np.allclose(psi.values, np.exp(1j * g.x), atol=1e-13)

    def test_winding(self):
        g = PeriodicGrid(64)
        with pytest.raises(TorsionWindingError):
            hasimoto(RealField(g, np.ones(64)), RealField(g, 0.3 * np.ones(64)))


class TestFlow:
    def test_circle_translates(self):
        # binormal flow moves a circle of radius R along its axis at speed 1/R
        R = 2.0
        c0 = ClosedCurve3D.circle(64, R)
        tr = filament_evolve(c0, 1e-2, 0.5)
        moved = c0.points.copy()
        moved[2] += 0.5 / R
        assert np.max(np.abs(tr.final.points - moved)) < 1e-12

    def test_invariants(self):
        c0 = ClosedCurve3D.perturbed_circle(128, 0.05, 3)
        tr = filament_evolve(c0, 1e-4, 0.05)
        assert tr.drift("norm_or_mass", relative=True) < 1e-8
        assert tr.drift("hamiltonian", relative=True) < 1e-6
        assert tr.column("arclength_defect").max() < 1e-6
        assert np.max(np.abs(tr.column("total_torsion"))) < 1e-8

    def test_reparametrize_keeps_grid(self):
        c0 = ClosedCurve3D.perturbed_circle(128, 0.05, 3)
        tr = filament_evolve(c0, 1e-4, 0.01, reparametrize_every=10)
        assert tr.final.grid == c0.grid

    def test_hasimoto_image_solves_nls(self):
        c0 = ClosedCurve3D.perturbed_circle(128, 0.05, 3)
        fr = frenet(c0)
        nls = nls_evolve(hasimoto(fr.k, fr.tau), NLSParams(Nonlinearity.cubic(-0.5)), 1e-4, 0.02)
        ref = dict(zip(np.round(nls.times, 12), nls.states))
        tr = filament_evolve(c0, 1e-4, 0.02, reference=lambda t: ref[round(t, 12)].values)
        assert tr.column("correspondence_defect").max() < 1e-5

    def test_rejects_open_or_unparametrized(self):
        with pytest.raises(ValueError):
            filament_evolve(ClosedCurve3D.helix(32), 1e-3, 0.01)
        with pytest.raises(ValueError):
            filament_evolve(ClosedCurve3D.perturbed_circle(64, 0.1, 3, arclength=False), 1e-3, 0.01)
