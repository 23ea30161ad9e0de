"""
Closed space curves, their Frenet data, the Hasimoto transform and the
binormal (vortex filament) flow ``gamma_t = gamma' x gamma''``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Tuple, Union

import numpy as np

from ..field_core import ComplexField, PeriodicGrid, RealField, solve_monotone
from ..wave_geometry import aligned_error
from .trajectory import SolverError, Trajectory, rk4_step, step_schedule

IMMERSION_FLOOR = 1e-6
CURVATURE_FLOOR = 1e-6
WINDING_TOL = 1e-8


class ImmersionError(SolverError):
    """The curve has (numerically) vanishing speed somewhere."""


class TorsionWindingError(ValueError):
    """Total torsion is not a multiple of 2 pi, so the Hasimoto image is not periodic."""


@dataclass(frozen=True)
class ClosedCurve3D:
    """Curve ``gamma(x) = points(x) + drift * x`` sampled on a periodic grid.

    ``points`` has shape ``(3, n)``.  A nonzero ``drift`` describes curves
    that are periodic only up to a translation (e.g. a helix over one turn);
    closed curves have ``drift = 0``.
    """

    grid: PeriodicGrid
    points: np.ndarray
    drift: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.shape != (3, self.grid.n):
            raise ValueError(f"points must have shape (3, {self.grid.n}), got {pts.shape}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "drift", tuple(float(c) for c in self.drift))
        speed = self.speed()
        if np.min(speed) <= IMMERSION_FLOOR:
            raise ImmersionError(f"curve speed drops to {np.min(speed):.3e}")

    @classmethod
    def from_function(cls, grid: PeriodicGrid, func: Callable, drift=(0.0, 0.0, 0.0)) -> "ClosedCurve3D":
        return cls(grid, np.asarray(func(grid.x)), drift)

    @classmethod
    def circle(cls, n: int, radius: float = 1.0) -> "ClosedCurve3D":
        """Arclength-parametrized circle in the xy-plane."""
        grid = PeriodicGrid(n, 2 * np.pi * radius)
        s = grid.x / radius
        return cls(grid, radius * np.array([np.cos(s), np.sin(s), np.zeros_like(s)]))

    @classmethod
    def perturbed_circle(cls, n: int, eps: float = 0.05, mode: int = 3, arclength: bool = True) -> "ClosedCurve3D":
        """Planar curve ``r(u) = 1 + eps cos(mode u)``, by default resampled to arclength."""
        grid = PeriodicGrid(n)
        u = grid.x
        r = 1.0 + eps * np.cos(mode * u)
        c = cls(grid, np.array([r * np.cos(u), r * np.sin(u), np.zeros_like(u)]))
        return c.reparametrize_arclength() if arclength else c

    @classmethod
    def helix(cls, n: int, a: float = 1.0, b: float = 0.5) -> "ClosedCurve3D":
        """One turn of ``(a cos t, a sin t, b t)``: periodic up to the drift ``(0, 0, b)``."""
        grid = PeriodicGrid(n)
        t = grid.x
        return cls(grid, np.array([a * np.cos(t), a * np.sin(t), np.zeros_like(t)]), (0.0, 0.0, b))

    def with_points(self, points: np.ndarray) -> "ClosedCurve3D":
        return ClosedCurve3D(self.grid, points, self.drift)

    def derivative(self, order: int) -> np.ndarray:
        d = np.array([self.grid.diff(c, order) for c in self.points])
        if order == 1:
            d = d + np.asarray(self.drift)[:, None]
        return d

    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.derivative(1), axis=0)

    def length(self) -> float:
        return float(np.mean(self.speed()) * self.grid.L)

    def arclength_defect(self) -> float:
        """``max | |gamma'| - mean | / mean``."""
        s = self.speed()
        return float(np.max(np.abs(s - s.mean())) / s.mean())

    def reparametrize_arclength(self) -> "ClosedCurve3D":
        """Resample at equal arclength on a grid whose circumference is the length.

        The basepoint ``x = 0`` is kept.
        """
        if any(self.drift):
            raise ValueError("only closed curves can be reparametrized")
        g = self.grid
        speed = self.speed()
        mean = speed.mean()
        shat = np.fft.fft(g.antiderivative(speed))
        ds_hat = np.fft.fft(speed)
        s0 = np.real(g.interpolation_matrix(np.zeros(1)) @ shat)[0]

        def s_of(u):
            return mean * u + np.real(g.interpolation_matrix(u) @ shat) - s0

        def ds_of(u):
            return np.real(g.interpolation_matrix(u) @ ds_hat)

        length = mean * g.L
        new = PeriodicGrid(g.n, length)
        targets = new.x
        slack = np.max(np.abs(g.antiderivative(speed))) * 2 / max(np.min(speed), IMMERSION_FLOOR) + 1e-6
        u = solve_monotone(s_of, ds_of, targets, targets / mean - slack, targets / mean + slack)
        E = g.interpolation_matrix(u)
        pts = np.real(E @ np.fft.fft(self.points, axis=1).T).T
        return ClosedCurve3D(new, pts)

    def to_csv(self, path: Union[str, Path]) -> None:
        pts = self.points + np.asarray(self.drift)[:, None] * self.grid.x
        np.savetxt(path, pts.T, delimiter=",", header="x,y,z", comments="", fmt="%.17g")


@dataclass(frozen=True)
class FrenetData:
    k: RealField
    tau: RealField
    degenerate: bool


def frenet(c: ClosedCurve3D, k_floor: float = CURVATURE_FLOOR) -> FrenetData:
    """Curvature ``|g' x g''| / |g'|^3`` and torsion ``det(g', g'', g''') / |g' x g''|^2``.

    Where the curvature is below ``k_floor`` the torsion is set to 0 and the
    result is flagged degenerate.
    """
    d1, d2, d3 = (c.derivative(k) for k in (1, 2, 3))
    cross = np.cross(d1, d2, axis=0)
    cn = np.linalg.norm(cross, axis=0)
    speed = np.linalg.norm(d1, axis=0)
    k = cn / speed**3
    low = k < k_floor
    tau = np.zeros_like(k)
    ok = ~low
    tau[ok] = np.einsum("ij,ij->j", cross[:, ok], d3[:, ok]) / cn[ok] ** 2
    return FrenetData(RealField(c.grid, k), RealField(c.grid, tau), bool(np.any(low)))


def hasimoto(k: RealField, tau: RealField, winding_tol: float = WINDING_TOL) -> ComplexField:
    """``psi(x) = k(x) exp(i int_0^x tau)`` for arclength-sampled Frenet data.

    Raises :class:`TorsionWindingError` unless the total torsion is an integer
    multiple of ``2 pi``.
    """
    g = k.grid
    total = float(np.mean(tau.values) * g.L)
    turns = np.round(total / (2 * np.pi))
    if abs(total - 2 * np.pi * turns) > winding_tol:
        raise TorsionWindingError(
            f"total torsion {total:.6g} is not a multiple of 2 pi; the Hasimoto image is not periodic"
        )
    anti = g.antiderivative(tau.values)
    anti0 = g.interpolate(anti, np.zeros(1))[0]
    phase = anti - anti0 + np.mean(tau.values) * g.x
    return ComplexField(g, k.values * np.exp(1j * phase))


def willmore_energy(c: ClosedCurve3D) -> float:
    """``int k^2 |gamma'| dx`` over the whole curve (unnormalized measure)."""
    fr = frenet(c)
    return float(np.mean(fr.k.values**2 * c.speed()) * c.grid.L)


def filament_rhs(grid: PeriodicGrid):
    """``gamma' x gamma''`` projected onto the 2/3 band.

    The projection also keeps the top modes, whose linear frequency ``k^2``
    would leave the RK4 stability region, frozen at their initial values.
    """
    mask = grid.dealias_mask

    def rhs(t, y):
        (pts,) = y
        hat = np.fft.fft(pts, axis=1)
        d1 = np.fft.ifft(hat * (1j * _odd_k(grid)), axis=1).real
        d2 = np.fft.ifft(hat * (-grid.k**2), axis=1).real
        out = np.fft.fft(np.cross(d1, d2, axis=0), axis=1)
        out[:, ~mask] = 0.0
        return (np.fft.ifft(out, axis=1).real,)

    return rhs


def _odd_k(grid: PeriodicGrid) -> np.ndarray:
    k = grid.k.copy()
    k[grid.n // 2] = 0.0
    return k


def filament_evolve(
    c0: ClosedCurve3D,
    dt: float,
    T: float,
    stride: Optional[int] = None,
    reparametrize_every: int = 0,
    reference: Optional[Callable[[float], np.ndarray]] = None,
) -> Trajectory:
    """RK4 integration of the binormal flow with spectral derivatives.

    ``reparametrize_every = k > 0`` resamples to arclength every ``k`` steps.
    ``reference(t)``, when given, is compared with the Hasimoto image of each
    snapshot by phase-aligned L2 error.  Diagnostics: Willmore energy as
    ``hamiltonian``, length as ``norm_or_mass`` and the arclength defect.
    """
    if any(c0.drift):
        raise ValueError("the filament flow needs a closed curve")
    if c0.arclength_defect() > 1e-3:
        raise ValueError("initial curve is far from arclength; reparametrize it first")
    steps, stride = step_schedule(dt, T, stride)
    grid = c0.grid
    rhs = filament_rhs(grid)
    pts = c0.points.copy()
    traj = Trajectory()

    def rec(t, pts):
        try:
            c = ClosedCurve3D(grid, pts)
        except ImmersionError as exc:
            raise ImmersionError(f"{exc} at t={t:.6g}") from None
        fr = frenet(c)
        diag = dict(hamiltonian=willmore_energy(c), norm_or_mass=c.length(),
                    arclength_defect=c.arclength_defect(),
                    total_torsion=float(np.mean(fr.tau.values) * grid.L))
        if fr.degenerate:
            traj.warn(f"curvature below floor at t={t:.6g}; torsion set to 0 there")
        if reference is not None:
            diag["correspondence_defect"] = aligned_error(hasimoto(fr.k, fr.tau).values, reference(t))[0]
        traj.record(t, c, **diag)

    rec(0.0, pts)
    for i in range(1, steps + 1):
        (pts,) = rk4_step(rhs, (pts,), (i - 1) * dt, dt)
        if reparametrize_every and i % reparametrize_every == 0:
            c = ClosedCurve3D(grid, pts).reparametrize_arclength()
            if c.grid != grid:
                # keep the original grid; the length is conserved to roundoff
                c = ClosedCurve3D(grid, c.points)
            pts = c.points.copy()
        if i % stride == 0:
            rec(i * dt, pts)
    return traj
