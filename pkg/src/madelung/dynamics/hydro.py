"""
Hydrodynamic (quantum-pressure) form of the Schrodinger equation on the
cotangent bundle of densities.

With ``psi = sqrt(rho) exp(i theta / 2)`` the equation
``i psi_t = -psi'' + V psi + f(|psi|^2) psi`` becomes

    theta_t + theta'^2 / 2 - 2 (sqrt rho)'' / sqrt rho + 2 V + 2 f(rho) = 0,
    rho_t + (rho theta')' = 0.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from ..density_geometry import CotangentPoint, DensityFloorError, DensityPoint, _rho
from ..field_core import RealField
from ..madelung_maps import madelung_forward
from ..wave_geometry import aligned_error
from .schrodinger import NLSParams
from .trajectory import Trajectory, rk4_step, step_schedule

QUANTUM_PRESSURE_COEFF = 2.0


def hydro_hamiltonian(p: CotangentPoint, params: NLSParams) -> float:
    """``1/2 mean(theta'^2 rho / 4 + (sqrt rho)'^2) + 1/2 mean(V rho + F(rho))``."""
    grid = p.grid
    rho = _rho(p)
    th = grid.diff(p.theta.values, 1)
    sq = grid.diff(np.sqrt(rho), 1)
    kin = np.mean(0.25 * th**2 * rho + sq**2)
    return float(0.5 * kin + 0.5 * np.mean(params.potential(grid) * rho + params.f.F(rho)))


def hydro_rhs(grid, params: NLSParams, floor: float = 1e-8, dealias: bool = True):
    """Right-hand side ``(rho, theta) -> (rho_t, theta_t)`` as a closure."""
    V = params.potential(grid)
    proj = grid.dealias if dealias else (lambda a: a)

    def rhs(t, y):
        rho, theta = y
        if np.min(rho) <= floor:
            raise DensityFloorError(f"density fell to {np.min(rho):.3e} at t={t:.6g}")
        th = grid.diff(theta, 1)
        amp = np.sqrt(rho)
        pressure = QUANTUM_PRESSURE_COEFF * grid.diff(amp, 2) / amp
        theta_t = -0.5 * proj(th * th) + pressure - 2 * V - 2 * params.f.f(rho)
        rho_t = -grid.diff(proj(rho * th), 1)
        return rho_t, theta_t

    return rhs


def hydro_evolve(
    p0: CotangentPoint,
    params: NLSParams,
    dt: float,
    T: float,
    stride: Optional[int] = None,
    reference: Optional[Callable[[float], np.ndarray]] = None,
    dealias: bool = True,
) -> Trajectory:
    """RK4 integration with spectral derivatives and 2/3-rule products.

    The phase is re-gauged to zero mean after every step.  A density at or
    below the floor raises :class:`DensityFloorError` naming the time.
    ``reference(t)`` returns wave-function values compared against the
    Madelung image of each snapshot.
    """
    grid = p0.grid
    floor = p0.rho.floor
    steps, stride = step_schedule(dt, T, stride)
    rhs = hydro_rhs(grid, params, floor, dealias)
    y = (p0.rho.rho.values.copy(), p0.theta.values.copy())
    traj = Trajectory()

    def rec(t, y):
        rho, theta = y
        if np.min(rho) <= floor:
            raise DensityFloorError(f"density fell to {np.min(rho):.3e} at t={t:.6g}")
        mass = float(np.mean(rho))
        # snapshots store the unit-mass point; mass drift is reported separately
        pt = CotangentPoint(DensityPoint(RealField(grid, rho / mass), floor), RealField(grid, theta))
        diag = dict(hamiltonian=hydro_hamiltonian(pt, params), norm_or_mass=mass)
        if reference is not None:
            diag["correspondence_defect"] = aligned_error(madelung_forward(pt).values, reference(t))[0]
        traj.record(t, pt, **diag)

    rec(0.0, y)
    for i in range(1, steps + 1):
        y = rk4_step(rhs, y, (i - 1) * dt, dt)
        y = (y[0], y[1] - np.mean(y[1]))
        if i % stride == 0:
            rec(i * dt, y)
    return traj
