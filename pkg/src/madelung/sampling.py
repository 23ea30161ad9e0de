"""
Deterministic band-limited random data for tests and verification runs.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from .density_geometry import CotangentPoint, CotangentTangent, DensityPoint, DEFAULT_RHO_FLOOR
from .field_core import ComplexField, PeriodicGrid, RealField


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _band_limited(grid: PeriodicGrid, rng: np.random.Generator, band: int) -> np.ndarray:
    if band < 1:
        raise ValueError("band must be at least 1")
    if band > grid.n // 3:
        raise ValueError(f"band {band} exceeds the de-aliased range n/3 = {grid.n // 3}")
    m = np.arange(1, band + 1)
    coef = np.zeros(grid.n // 2 + 1, dtype=complex)
    coef[1 : band + 1] = (rng.normal(size=band) + 1j * rng.normal(size=band)) / m
    vals = np.fft.irfft(coef, n=grid.n)
    peak = np.max(np.abs(vals))
    return vals / peak if peak > 0 else vals


def random_smooth_field(
    grid: PeriodicGrid,
    seed=0,
    band: int = 6,
    amplitude: float = 1.0,
    complex_valued: bool = False,
):
    """Zero-mean field supported on modes ``1..band`` with peak ``amplitude``.

    Mode ``m`` carries a Gaussian coefficient damped by ``1/m``.  Complex
    fields have independent real and imaginary parts, each of peak
    ``amplitude``.
    """
    rng = _rng(seed)
    vals = amplitude * _band_limited(grid, rng, band)
    if not complex_valued:
        return RealField(grid, vals)
    return ComplexField(grid, vals + 1j * amplitude * _band_limited(grid, rng, band))


def random_density(
    grid: PeriodicGrid,
    seed=0,
    band: int = 6,
    amplitude: float = 0.3,
    floor: float = DEFAULT_RHO_FLOOR,
) -> DensityPoint:
    """``1 + amplitude * f`` floored at ``2 * floor`` and renormalized."""
    f = random_smooth_field(grid, seed, band, amplitude)
    vals = np.maximum(1.0 + f.values, 2 * floor)
    return DensityPoint.normalized(RealField(grid, vals), floor=floor)


def random_cotangent_point(
    grid: PeriodicGrid, seed=0, band: int = 6, rho_amplitude: float = 0.3, theta_amplitude: float = 1.0
) -> CotangentPoint:
    rng = _rng(seed)
    rho = random_density(grid, rng, band, rho_amplitude)
    theta = random_smooth_field(grid, rng, band, theta_amplitude)
    return CotangentPoint.gauged(rho, theta)


def random_tangent(
    p: CotangentPoint, seed=0, band: int = 6, amplitude: float = 0.5, horizontal: bool = False
) -> CotangentTangent:
    """Random tangent at ``p``; ``horizontal`` sets ``theta_dot`` to zero."""
    rng = _rng(seed)
    grid = p.grid
    rd = random_smooth_field(grid, rng, band, amplitude)
    td = random_smooth_field(grid, rng, band, 0.0 if horizontal else amplitude)
    return CotangentTangent.at(p, rd, td)


def random_wave(grid: PeriodicGrid, seed=0, band: int = 6, amplitude: float = 0.5) -> ComplexField:
    """Band-limited complex field ``1 + amplitude * f`` (unnormalized, may vanish)."""
    f = random_smooth_field(grid, seed, band, amplitude, complex_valued=True)
    return ComplexField(grid, 1.0 + f.values)


def random_pair(
    grid: PeriodicGrid, seed=0, band: int = 6, amplitude: float = 1.0
) -> Tuple[RealField, RealField]:
    rng = _rng(seed)
    return (random_smooth_field(grid, rng, band, amplitude),
            random_smooth_field(grid, rng, band, amplitude))
