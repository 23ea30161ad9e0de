"""
Projective geometry of wave functions: Hermitian pairing, Fubini-Study metric,
the projective symplectic form and great-circle geodesics.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .density_geometry import MetricScaling
from .field_core import ComplexField, GridMismatchError, PeriodicGrid, grid_from_samples

NORM_TOL = 1e-12
HORIZONTAL_TOL = 1e-10


def hermitian(phi: ComplexField, psi: ComplexField) -> complex:
    """``<phi, psi> = mean(phi * conj(psi))``; conjugate-linear in ``psi``."""
    if phi.grid != psi.grid:
        raise GridMismatchError("fields live on different grids")
    return complex(np.mean(phi.values * np.conj(psi.values)))


@dataclass(frozen=True)
class WaveFunction:
    """Unit-norm lift of a point of projective space."""

    psi: ComplexField

    def __post_init__(self):
        if not isinstance(self.psi, ComplexField):
            object.__setattr__(self, "psi", ComplexField(self.psi.grid, self.psi.values))
        norm2 = np.mean(np.abs(self.psi.values) ** 2)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"wave function has squared norm {norm2!r}, expected 1")

    @classmethod
    def normalized(cls, psi, grid: PeriodicGrid = None) -> "WaveFunction":
        grid = grid or psi.grid
        vals = np.asarray(getattr(psi, "values", psi), dtype=complex)
        return cls(ComplexField(grid, vals / np.sqrt(np.mean(np.abs(vals) ** 2))))

    @property
    def grid(self) -> PeriodicGrid:
        return self.psi.grid

    @property
    def values(self) -> np.ndarray:
        return self.psi.values

    @property
    def gauge_phase(self) -> float:
        """Argument of ``mean(psi)``; the canonical lift has this equal to 0."""
        return float(np.angle(np.mean(self.psi.values)))

    @property
    def gauge_free(self) -> bool:
        return abs(np.mean(self.psi.values)) < 1e-12

    def canonical(self) -> "WaveFunction":
        """Lift with ``mean(psi)`` real and non-negative (unchanged if it vanishes)."""
        if self.gauge_free:
            return self
        return WaveFunction(ComplexField(self.grid, self.psi.values * np.exp(-1j * self.gauge_phase)))

    def non_vanishing(self, floor: float = 1e-8) -> bool:
        """Grid-point check of ``|psi|^2 > floor``; sub-grid zeros are not detected."""
        return bool(np.min(np.abs(self.psi.values) ** 2) > floor)

    def to_csv(self, path: Union[str, Path]) -> None:
        self.psi.to_csv(path)

    @classmethod
    def from_csv(cls, path: Union[str, Path], grid: PeriodicGrid = None) -> "WaveFunction":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        grid = grid or grid_from_samples(data[:, 0])
        return cls.normalized(ComplexField(grid, data[:, 1] + 1j * data[:, 2]))

    def diagnostics(self) -> dict:
        return {
            "norm": float(np.sqrt(np.mean(np.abs(self.psi.values) ** 2))),
            "gauge_phase": self.gauge_phase,
        }


@dataclass(frozen=True)
class ProjectiveTangent:
    """Horizontal tangent ``psi_dot`` at ``base``: ``<psi_dot, psi> = 0``."""

    base: WaveFunction
    psi_dot: ComplexField

    def __post_init__(self):
        if self.psi_dot.grid != self.base.grid:
            raise GridMismatchError("tangent and base live on different grids")
        defect = abs(hermitian(self.psi_dot, self.base.psi))
        scale = max(1.0, np.sqrt(np.mean(np.abs(self.psi_dot.values) ** 2)))
        if defect > HORIZONTAL_TOL * scale:
            raise ValueError(f"tangent is not horizontal (|<psi_dot, psi>| = {defect:.2e})")

    @property
    def values(self) -> np.ndarray:
        return self.psi_dot.values

    def norm(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.psi_dot.values) ** 2)))


def _vals(u) -> np.ndarray:
    return u.psi_dot.values if isinstance(u, ProjectiveTangent) else u.values


def fubini_study(
    psi: WaveFunction,
    u,
    w,
    s: MetricScaling = MetricScaling(),
) -> float:
    """Real part of the scaled Fubini-Study Hermitian form.

    ``beta * Re(<u,w>/<psi,psi> - <u,psi><psi,w>/<psi,psi>^2)``.  Raw
    :class:`ComplexField` tangents are accepted so that vertical directions can
    be evaluated too.
    """
    p = psi.psi.values
    uv, wv = _vals(u), _vals(w)
    pp = np.mean(np.abs(p) ** 2)
    uw = np.mean(uv * np.conj(wv))
    up = np.mean(uv * np.conj(p))
    pw = np.mean(p * np.conj(wv))
    return float(s.beta * np.real(uw / pp - up * pw / pp**2))


def projective_symplectic(psi: WaveFunction, u, w, s: MetricScaling = MetricScaling()) -> float:
    """``beta * mean(Im(u conj(w)))``."""
    return float(s.beta * np.mean(np.imag(_vals(u) * np.conj(_vals(w)))))


def horizontal_projection(psi: WaveFunction, v) -> ProjectiveTangent:
    """``v - <v, psi> psi``."""
    p = psi.psi.values
    vv = np.asarray(getattr(v, "values", v), dtype=complex)
    out = vv - np.mean(vv * np.conj(p)) * p
    return ProjectiveTangent(psi, ComplexField(psi.grid, out))


def fs_geodesic_exact(psi0: WaveFunction, v0: ProjectiveTangent, t: float) -> WaveFunction:
    """Great circle ``cos(|v| t) psi0 + sin(|v| t) v / |v|`` on the unit sphere."""
    speed = v0.norm()
    if speed == 0:
        raise ValueError("initial velocity must be nonzero")
    vals = np.cos(speed * t) * psi0.values + np.sin(speed * t) * v0.values / speed
    return WaveFunction.normalized(ComplexField(psi0.grid, vals))


def projective_distance(a: WaveFunction, b: WaveFunction) -> float:
    """Phase-invariant geodesic distance ``arccos |<a, b>|``.

    Evaluated as ``2 arcsin(e / 2)`` with ``e`` the phase-aligned L2 error,
    which is the same quantity for unit vectors but keeps full relative
    precision near zero.
    """
    if a.grid != b.grid:
        raise GridMismatchError("wave functions live on different grids")
    err, _ = aligned_error(a.psi, b.psi)
    return float(2 * np.arcsin(min(1.0, err / 2)))


def aligned_error(a, b) -> Tuple[float, float]:
    """``min_tau ||a - exp(i tau) b||`` and the optimal ``tau = arg <a, b>``.

    Works for unnormalized fields as well.
    """
    av = np.asarray(getattr(a, "values", a))
    bv = np.asarray(getattr(b, "values", b))
    tau = float(np.angle(np.mean(av * np.conj(bv))))
    err = np.sqrt(np.mean(np.abs(av - np.exp(1j * tau) * bv) ** 2))
    return float(err), tau
