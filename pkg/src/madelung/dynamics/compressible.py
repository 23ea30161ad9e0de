"""
Two-component compressible fluid on the cotangent bundle and its spinor
counterpart under the multicomponent Madelung transform.

Fluid side, with ``H = mean(theta'^2 rho / 2 + tau'^2 varsigma / 2 + u(rho, varsigma))``::

    rho_t = -(rho theta')',          theta_t = -theta'^2 / 2 - u_rho,
    varsigma_t = -(varsigma tau')',  tau_t = -tau'^2 / 2 - u_varsigma.

Spinor side, with ``psi_1 = sqrt(rho) exp(i theta / 2)`` and
``psi_2 = sqrt(varsigma) exp(i tau / 2)``::

    i psi_k,t = -psi_k'' + 2 (dW / d rho_k) psi_k,
    W = -1/2 mean(|psi_1|'^2 + |psi_2|'^2) + 1/4 mean(u(|psi_1|^2, |psi_2|^2)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from ..density_geometry import DensityFloorError
from ..field_core import ComplexField, PeriodicGrid, RealField
from ..wave_geometry import aligned_error
from .schrodinger import modulus_gradient_sq, nls_propagator
from .trajectory import Trajectory, rk4_step, step_schedule


@dataclass(frozen=True, eq=False)
class InternalEnergy2:
    """Pointwise internal energy density ``u(rho, varsigma)`` with its partials."""

    u: Callable[[np.ndarray, np.ndarray], np.ndarray]
    u_rho: Callable[[np.ndarray, np.ndarray], np.ndarray]
    u_varsigma: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __post_init__(self):
        h = 1e-5
        for r, s in ((1.0, 0.5), (0.7, 1.2), (1.3, 0.9)):
            for partial, e in ((self.u_rho, (h, 0.0)), (self.u_varsigma, (0.0, h))):
                fd = (self.u(r + e[0], s + e[1]) - self.u(r - e[0], s - e[1])) / (2 * h)
                ref = partial(r, s)
                if abs(fd - ref) > 1e-8 * max(1.0, abs(ref)):
                    raise ValueError(f"partial derivative mismatch at ({r}, {s}): {fd!r} vs {ref!r}")

    @classmethod
    def quadratic(cls, a: float = 1.0, b: float = 1.0, c: float = 0.0,
                  rho0: float = 1.0, varsigma0: float = 1.0) -> "InternalEnergy2":
        """``a (rho-rho0)^2/2 + b (vs-vs0)^2/2 + c (rho-rho0)(vs-vs0)``; stationary at ``(rho0, vs0)``."""
        return cls(
            lambda r, s: 0.5 * a * (r - rho0) ** 2 + 0.5 * b * (s - varsigma0) ** 2 + c * (r - rho0) * (s - varsigma0),
            lambda r, s: a * (r - rho0) + c * (s - varsigma0),
            lambda r, s: b * (s - varsigma0) + c * (r - rho0),
        )


@dataclass(frozen=True)
class CompressibleState:
    """``(rho, varsigma, theta, tau)`` with zero-mean phases."""

    rho: RealField
    varsigma: RealField
    theta: RealField
    tau: RealField

    @classmethod
    def gauged(cls, rho, varsigma, theta, tau) -> "CompressibleState":
        g = rho.grid
        r = rho.values / np.mean(rho.values)
        return cls(RealField(g, r), varsigma,
                   RealField(g, theta.values - np.mean(theta.values)),
                   RealField(g, tau.values - np.mean(tau.values)))

    @property
    def grid(self) -> PeriodicGrid:
        return self.rho.grid

    def spinor(self) -> Tuple[ComplexField, ComplexField]:
        """Componentwise Madelung image ``(sqrt(rho) e^{i theta/2}, sqrt(vs) e^{i tau/2})``."""
        g = self.grid
        for name, f in (("rho", self.rho), ("varsigma", self.varsigma)):
            if np.min(f.values) <= 0:
                raise DensityFloorError(f"{name} is not positive")
        return (ComplexField(g, np.sqrt(self.rho.values) * np.exp(0.5j * self.theta.values)),
                ComplexField(g, np.sqrt(self.varsigma.values) * np.exp(0.5j * self.tau.values)))

    def to_csv(self, path) -> None:
        g = self.grid
        cols = [g.x, self.rho.values, self.varsigma.values, self.theta.values, self.tau.values]
        np.savetxt(path, np.column_stack(cols), delimiter=",",
                   header="x,rho,varsigma,theta,tau", comments="", fmt="%.17g")


def fluid_hamiltonian(s: CompressibleState, U: InternalEnergy2) -> float:
    g = s.grid
    th, ta = g.diff(s.theta.values, 1), g.diff(s.tau.values, 1)
    r, v = s.rho.values, s.varsigma.values
    return float(np.mean(0.5 * th**2 * r + 0.5 * ta**2 * v + U.u(r, v)))


def spinor_hamiltonian(psis: Tuple[ComplexField, ComplexField], U: InternalEnergy2) -> float:
    """``1/2 sum_k mean|psi_k'|^2 + W``; equals a quarter of the fluid Hamiltonian."""
    g = psis[0].grid
    kin = 0.0
    for p in psis:
        f = p.values
        kin += 0.5 * np.mean(np.abs(g.diff(f, 1)) ** 2) - 0.5 * np.mean(modulus_gradient_sq(g, f))
    r, v = (np.abs(p.values) ** 2 for p in psis)
    return float(kin + 0.25 * np.mean(U.u(r, v)))


def compressible_rhs(grid: PeriodicGrid, U: InternalEnergy2, floor: float = 1e-8):
    proj = grid.dealias

    def rhs(t, y):
        r, v, th, ta = y
        for name, f in (("rho", r), ("varsigma", v)):
            if np.min(f) <= floor:
                raise DensityFloorError(f"{name} fell to {np.min(f):.3e} at t={t:.6g}")
        dth, dta = grid.diff(th, 1), grid.diff(ta, 1)
        return (
            -grid.diff(proj(r * dth), 1),
            -grid.diff(proj(v * dta), 1),
            -0.5 * proj(dth * dth) - U.u_rho(r, v),
            -0.5 * proj(dta * dta) - U.u_varsigma(r, v),
        )

    return rhs


def compressible2_evolve(
    s0: CompressibleState,
    U: InternalEnergy2,
    dt: float,
    T: float,
    stride: Optional[int] = None,
    reference: Optional[Callable[[float], Tuple[np.ndarray, np.ndarray]]] = None,
    floor: float = 1e-8,
) -> Trajectory:
    """RK4 integration of the fluid side; phases re-gauged every step.

    ``reference(t)`` returns spinor component values; the defect is the
    root-sum-square of the componentwise phase-aligned L2 errors.
    """
    grid = s0.grid
    steps, stride = step_schedule(dt, T, stride)
    rhs = compressible_rhs(grid, U, floor)
    y = tuple(f.values.copy() for f in (s0.rho, s0.varsigma, s0.theta, s0.tau))
    traj = Trajectory()

    def rec(t, y):
        state = CompressibleState(*(RealField(grid, f) for f in y))
        diag = dict(hamiltonian=fluid_hamiltonian(state, U), norm_or_mass=float(np.mean(y[0])),
                    varsigma_mass=float(np.mean(y[1])))
        if reference is not None:
            ref = reference(t)
            errs = [aligned_error(a.values, b)[0] for a, b in zip(state.spinor(), ref)]
            diag["correspondence_defect"] = float(np.sqrt(sum(e**2 for e in errs)))
        traj.record(t, state, **diag)

    rec(0.0, y)
    for i in range(1, steps + 1):
        y = rk4_step(rhs, y, (i - 1) * dt, dt)
        y = (y[0], y[1], y[2] - np.mean(y[2]), y[3] - np.mean(y[3]))
        if i % stride == 0:
            rec(i * dt, y)
    return traj


def spinor_potentials(grid: PeriodicGrid, f1: np.ndarray, f2: np.ndarray, U: InternalEnergy2):
    """``2 dW/d rho_k = |psi_k|'' / |psi_k| + u_k / 2`` for both components."""
    m1, m2 = np.abs(f1), np.abs(f2)
    r, v = m1**2, m2**2
    q1 = grid.diff(m1, 2) / m1 + 0.5 * U.u_rho(r, v)
    q2 = grid.diff(m2, 2) / m2 + 0.5 * U.u_varsigma(r, v)
    return q1, q2


def spinor_evolve(
    psi1: ComplexField,
    psi2: ComplexField,
    U: InternalEnergy2,
    dt: float,
    T: float,
    stride: Optional[int] = None,
    floor: float = 1e-8,
) -> Trajectory:
    """Strang splitting with the modulus-dependent diagonal potential.

    The phase substeps leave ``|psi_k|`` unchanged, so the potential is exact
    within each substep and refreshed between them.
    """
    grid = psi1.grid
    steps, stride = step_schedule(dt, T, stride)
    prop = nls_propagator(grid, dt)
    f1, f2 = psi1.values.copy(), psi2.values.copy()
    traj = Trajectory()

    def check(t, f1, f2):
        for name, f in (("rho", f1), ("varsigma", f2)):
            if np.min(np.abs(f) ** 2) <= floor:
                raise DensityFloorError(f"{name} fell below floor at t={t:.6g}")

    def half(f1, f2):
        q1, q2 = spinor_potentials(grid, f1, f2, U)
        return f1 * np.exp(-0.5j * dt * q1), f2 * np.exp(-0.5j * dt * q2)

    def rec(t, f1, f2):
        state = (ComplexField(grid, f1), ComplexField(grid, f2))
        traj.record(t, state, hamiltonian=spinor_hamiltonian(state, U),
                    norm_or_mass=float(np.mean(np.abs(f1) ** 2)),
                    varsigma_mass=float(np.mean(np.abs(f2) ** 2)))

    rec(0.0, f1, f2)
    for i in range(1, steps + 1):
        check((i - 1) * dt, f1, f2)
        f1, f2 = half(f1, f2)
        f1, f2 = np.fft.ifft(np.fft.fft(f1) * prop), np.fft.ifft(np.fft.fft(f2) * prop)
        f1, f2 = half(f1, f2)
        if i % stride == 0:
            rec(i * dt, f1, f2)
    return traj
