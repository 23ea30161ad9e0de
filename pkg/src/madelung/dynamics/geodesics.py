"""
Geodesics of the Sasaki-Fisher-Rao metric and the 2-component Hunter-Saxton
system, with the Lenells map onto the sphere of wave functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from ..density_geometry import (
    CotangentPoint,
    CotangentTangent,
    DensityFloorError,
    DensityPoint,
    _sfr_accel,
)
from ..field_core import ComplexField, PeriodicGrid, RealField
from ..madelung_maps import NotADiffeomorphismError, inverse_diffeomorphism, madelung_forward
from ..wave_geometry import WaveFunction, projective_distance
from .trajectory import Trajectory, rk4_step, step_schedule

TAIL_WARNING = 1e-6


# -- Sasaki-Fisher-Rao ------------------------------------------------------------


@dataclass(frozen=True)
class GeodesicState:
    point: CotangentPoint
    velocity: CotangentTangent

    @property
    def momentum_density(self) -> RealField:
        """``theta_dot * rho``, conserved pointwise along geodesics."""
        return self.velocity.theta_dot * self.point.rho.rho

    def madelung_image(self) -> WaveFunction:
        return madelung_forward(self.point)

    def to_csv(self, path) -> None:
        g = self.point.grid
        cols = [g.x, self.point.rho.rho.values, self.point.theta.values,
                self.velocity.rho_dot.values, self.velocity.theta_dot.values]
        np.savetxt(path, np.column_stack(cols), delimiter=",",
                   header="x,rho,theta,rho_dot,theta_dot", comments="", fmt="%.17g")


def sfr_geodesic_evolve(
    p0: CotangentPoint,
    v0: CotangentTangent,
    dt: float,
    T: float,
    stride: Optional[int] = None,
    reference: Optional[Callable[[float], WaveFunction]] = None,
) -> Trajectory:
    """RK4 integration of the geodesic equations on ``(rho, theta, rho_dot, theta_dot)``.

    Diagnostics: the metric speed squared as ``hamiltonian``, the mass, the
    drift of ``theta_dot * rho`` and, with ``reference(t)``, the projective
    distance of the Madelung image to the reference wave function.
    """
    v0.check_at(p0, 1e-10)
    grid = p0.grid
    floor = p0.rho.floor
    steps, stride = step_schedule(dt, T, stride)

    def rhs(t, y):
        rho, theta, rd, td = y
        if np.min(rho) <= floor:
            raise DensityFloorError(f"density fell to {np.min(rho):.3e} at t={t:.6g}")
        rdd, tdd = _sfr_accel(rho, rd, td)
        return rd, td, rdd - np.mean(rdd), tdd

    y = (p0.rho.rho.values.copy(), p0.theta.values.copy(),
         v0.rho_dot.values.copy(), v0.theta_dot.values.copy())
    m0 = y[3] * y[0]
    traj = Trajectory()

    def rec(t, y):
        rho, theta, rd, td = y
        if np.min(rho) <= floor:
            raise DensityFloorError(f"density fell to {np.min(rho):.3e} at t={t:.6g}")
        mass = float(np.mean(rho))
        pt = CotangentPoint(DensityPoint(RealField(grid, rho / mass), floor), RealField(grid, theta))
        vel = CotangentTangent(RealField(grid, rd - np.mean(rd)), RealField(grid, td))
        state = GeodesicState(pt, vel)
        speed2 = 0.25 * np.mean(rd**2 / rho + td**2 * rho)
        diag = dict(hamiltonian=speed2, norm_or_mass=mass,
                    momentum_drift=float(np.max(np.abs(td * rho - m0))))
        if reference is not None:
            diag["correspondence_defect"] = projective_distance(state.madelung_image(), reference(t))
        traj.record(t, state, **diag)

    rec(0.0, y)
    for i in range(1, steps + 1):
        y = rk4_step(rhs, y, (i - 1) * dt, dt)
        y = (y[0], y[1] - np.mean(y[1]), y[2], y[3])
        if i % stride == 0:
            rec(i * dt, y)
    return traj


# -- 2-component Hunter-Saxton ----------------------------------------------------


@dataclass(frozen=True)
class HS2State:
    """Eulerian fields ``(v, sigma)`` with the Lagrangian data ``(phi, a)``.

    ``phi(x) = x + displacement(x)`` is the flow of ``v`` and ``a`` the
    accumulated phase, ``a_t = sigma o phi``.
    """

    v: RealField
    sigma: RealField
    displacement: RealField
    a: RealField

    @property
    def grid(self) -> PeriodicGrid:
        return self.v.grid

    def madelung_image(self) -> WaveFunction:
        return lenells_map(self.displacement, self.a)

    def conserved_field(self) -> np.ndarray:
        """``(sigma o phi) phi'``, the Lagrangian image of ``theta_dot * rho``."""
        g = self.grid
        d = self.displacement.values
        return g.interpolate(self.sigma.values, g.x + d) * (1.0 + g.diff(d, 1))

    def to_csv(self, path) -> None:
        g = self.grid
        cols = [g.x, self.v.values, self.sigma.values, self.displacement.values, self.a.values]
        np.savetxt(path, np.column_stack(cols), delimiter=",",
                   header="x,v,sigma,displacement,a", comments="", fmt="%.17g")


def lenells_map(displacement: RealField, alpha: RealField) -> WaveFunction:
    """``(phi, alpha) -> sqrt(phi') exp(i alpha / 2)``."""
    g = displacement.grid
    dphi = 1.0 + g.diff(displacement.values, 1)
    if np.min(dphi) <= 0:
        raise NotADiffeomorphismError(f"phi' has minimum {np.min(dphi):.3e}")
    return WaveFunction(ComplexField(g, np.sqrt(dphi) * np.exp(0.5j * alpha.values)))


def hs2_from_sfr(p0: CotangentPoint, v0: CotangentTangent) -> HS2State:
    """Hunter-Saxton data whose Lenells curve starts at ``Phi(p0)`` with velocity ``T Phi(v0)``.

    ``phi0' = rho0`` and ``phi_t' = rho_dot0`` fix ``phi0`` and ``v0 o phi0``
    up to constants (the mean-zero choice is taken); ``sigma0 o phi0 = theta_dot0``
    and ``a0 = theta0``.  Then ``mean(sigma0) = mean(theta_dot0 rho0) = 0``.
    """
    g = p0.grid
    rho = p0.rho.rho.values
    disp = g.antiderivative(rho - 1.0)
    phidot = g.antiderivative(v0.rho_dot.values)
    xinv, _ = inverse_diffeomorphism(RealField(g, disp))
    E = g.interpolation_matrix(xinv)
    v = np.real(E @ np.fft.fft(phidot))
    sigma = np.real(E @ np.fft.fft(v0.theta_dot.values))
    return HS2State(RealField(g, v), RealField(g, sigma), RealField(g, disp), p0.theta)


def hs2_rhs(grid: PeriodicGrid):
    """``v_t = D^-2(-2 v' v'' - v v''' + sigma sigma')`` (mean-zero), ``sigma_t = -(sigma v)'``,
    ``d_t = v(x + d)``, ``a_t = sigma(x + d)``."""

    def rhs(t, y):
        v, sigma, d, a = y
        v1, v2, v3 = (grid.diff(v, k) for k in (1, 2, 3))
        vt = grid.inverse_laplacian(-2 * v1 * v2 - v * v3 + sigma * grid.diff(sigma, 1))
        st = -grid.diff(sigma * v, 1)
        E = grid.interpolation_matrix(grid.x + d)
        dt_ = np.real(E @ np.fft.fft(v))
        at = np.real(E @ np.fft.fft(sigma))
        return vt, st, dt_, at

    return rhs


def hs2_evolve(
    s0: HS2State,
    dt: float,
    T: float,
    stride: Optional[int] = None,
    reference: Optional[Callable[[float], WaveFunction]] = None,
) -> Trajectory:
    """RK4 integration of the 2-component Hunter-Saxton system and its flow map.

    The zero mode of ``v_t`` is fixed by ``mean(v_t) = 0``; the density
    ``phi'`` and the phase ``a`` do not depend on this choice.  Spectral tail
    energy above ``1e-6`` of the total is reported as a warning.
    """
    grid = s0.grid
    steps, stride = step_schedule(dt, T, stride)
    rhs = hs2_rhs(grid)
    y = tuple(f.values.copy() for f in (s0.v, s0.sigma, s0.displacement, s0.a))
    c0 = s0.conserved_field()
    traj = Trajectory()

    def rec(t, y):
        v, sigma, d, a = y
        if np.min(1.0 + grid.diff(d, 1)) <= 0:
            raise NotADiffeomorphismError(f"flow map lost invertibility at t={t:.6g}")
        state = HS2State(*(RealField(grid, f) for f in y))
        for name, f in (("v", v), ("sigma", sigma)):
            if grid.spectral_tail_fraction(f) > TAIL_WARNING:
                traj.warn(f"{name} lost smoothness near t={t:.6g} (spectral tail above {TAIL_WARNING})")
        energy = 0.25 * np.mean(grid.diff(v, 1) ** 2 + sigma**2)
        diag = dict(hamiltonian=energy, norm_or_mass=float(np.mean(1.0 + grid.diff(d, 1))),
                    conserved_drift=float(np.max(np.abs(state.conserved_field() - c0))),
                    sigma_max=float(np.max(np.abs(sigma))))
        if reference is not None:
            diag["correspondence_defect"] = projective_distance(state.madelung_image(), reference(t))
        traj.record(t, state, **diag)

    rec(0.0, y)
    for i in range(1, steps + 1):
        y = rk4_step(rhs, y, (i - 1) * dt, dt)
        if i % stride == 0:
            rec(i * dt, y)
    return traj
