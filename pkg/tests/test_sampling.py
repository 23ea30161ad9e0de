import numpy as np
import pytest
from hypothesis import given, strategies as st

from madelung.field_core import PeriodicGrid
from madelung.sampling import (
    random_cotangent_point,
    random_density,
    random_pair,
    random_smooth_field,
    random_tangent,
    random_wave,
)

seeds = st.integers(0, 2**32 - 1)


def test_deterministic(grid):
    a = random_smooth_field(grid, 7)
    b = random_smooth_field(grid, 7)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, random_smooth_field(grid, 8).values)


def test_zero_amplitude(grid):
    assert np.all(random_smooth_field(grid, 1, amplitude=0.0).values == 0)
    assert np.all(random_density(grid, 1, amplitude=0.0).rho.values == 1.0)


@given(seed=seeds, band=st.integers(1, 21))
def test_spectral_support(seed, band):
    g = PeriodicGrid(64)
    f = random_smooth_field(g, seed, band, complex_valued=True)
    coef = np.fft.fft(f.values)
    m = np.abs(g.mode_index)
    assert np.max(np.abs(coef[(m == 0) | (m > band)])) < 1e-12
    assert np.max(np.abs(f.values.real)) == pytest.approx(1.0)


def test_band_limit_enforced():
    with pytest.raises(ValueError):
        random_smooth_field(PeriodicGrid(32), 0, band=11)
    with pytest.raises(ValueError):
        random_smooth_field(PeriodicGrid(32), 0, band=0)


@given(seed=seeds)
def test_derived_objects_are_valid(seed):
    g = PeriodicGrid(64)
    rng = np.random.default_rng(seed)
    p = random_cotangent_point(g, rng)
    assert abs(np.mean(p.rho.rho.values) - 1) < 1e-14
    assert random_tangent(p, rng).constraint_defect(p) < 1e-14
    assert np.all(random_tangent(p, rng, horizontal=True).theta_dot.values == 0)
    assert random_wave(g, rng).values.dtype == complex
    a, b = random_pair(g, rng)
    assert a.grid == b.grid


def test_density_floor(grid):
    d = random_density(grid, 3, amplitude=3.0)
    assert np.min(d.rho.values) > 0
