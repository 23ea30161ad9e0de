"""
Nonlinear Schrodinger (Gross-Pitaevskii) equation ``i psi_t = -psi'' + V psi + f(|psi|^2) psi``
and its Hamiltonians.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

from ..field_core import ComplexField, PeriodicGrid, RealField
from ..wave_geometry import WaveFunction, aligned_error
from .trajectory import Trajectory, step_schedule


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Local nonlinearity ``f`` with primitive ``F`` (``F' = f``).

    Use the constructors :meth:`none`, :meth:`cubic`, :meth:`quartic` and
    :meth:`tabulated`.  The pair is spot-checked by central differences at
    construction.
    """

    kind: str
    f: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    kappa: float = 0.0
    domain: tuple = (0.5, 2.0)

    def __post_init__(self):
        h = 1e-5
        lo, hi = self.domain
        for a in np.linspace(lo + 2 * h, hi - 2 * h, 5):
            fd = (self.F(a + h) - self.F(a - h)) / (2 * h)
            ref = self.f(a)
            if abs(fd - ref) > 1e-8 * max(1.0, abs(ref)):
                raise ValueError(f"F' != f at a={a}: {fd!r} vs {ref!r}")

    @classmethod
    def none(cls) -> "Nonlinearity":
        return cls("none", lambda a: 0.0 * np.asarray(a), lambda a: 0.0 * np.asarray(a))

    @classmethod
    def cubic(cls, kappa: float = 1.0) -> "Nonlinearity":
        """``f(a) = kappa a`` (cubic in ``psi``); ``F(a) = kappa a^2 / 2``."""
        return cls("cubic", lambda a: kappa * np.asarray(a), lambda a: 0.5 * kappa * np.asarray(a) ** 2, kappa)

    @classmethod
    def quartic(cls) -> "Nonlinearity":
        """``F(a) = (a - 1)^2 / 2`` so ``f(a) = a - 1``."""
        return cls("quartic", lambda a: np.asarray(a) - 1.0, lambda a: 0.5 * (np.asarray(a) - 1.0) ** 2)

    @classmethod
    def tabulated(cls, a_values, f_values) -> "Nonlinearity":
        """Cubic-spline ``f`` through samples; ``F`` is its exact antiderivative."""
        spline = CubicSpline(np.asarray(a_values, float), np.asarray(f_values, float))
        prim = spline.antiderivative()
        domain = (float(np.min(a_values)), float(np.max(a_values)))
        return cls("tabulated", spline, prim, domain=domain)

    def __repr__(self) -> str:
        return f"Nonlinearity({self.kind!r}" + (f", kappa={self.kappa})" if self.kind == "cubic" else ")")


@dataclass(frozen=True)
class NLSParams:
    """Potential ``V`` (``None`` means zero) and nonlinearity; hbar = 1, mass = 1/2."""

    f: Nonlinearity = Nonlinearity.none()
    V: Optional[RealField] = None

    def potential(self, grid: PeriodicGrid) -> np.ndarray:
        if self.V is None:
            return np.zeros(grid.n)
        if self.V.grid != grid:
            raise ValueError("potential lives on a different grid")
        return self.V.values


def _values(psi) -> np.ndarray:
    return psi.psi.values if isinstance(psi, WaveFunction) else np.asarray(psi.values, dtype=complex)


def _rewrap(like, grid, vals):
    if isinstance(like, WaveFunction):
        # the split-step flow is unitary; renormalize only against roundoff
        return WaveFunction.normalized(ComplexField(grid, vals))
    return ComplexField(grid, vals)


def nls_hamiltonian(psi, p: NLSParams) -> float:
    """``1/2 mean|psi'|^2 + 1/2 mean(V |psi|^2 + F(|psi|^2))``."""
    grid = psi.grid
    f = _values(psi)
    a = np.abs(f) ** 2
    kin = np.mean(np.abs(grid.diff(f, 1)) ** 2)
    return float(0.5 * kin + 0.5 * np.mean(p.potential(grid) * a + p.f.F(a)))


def modulus_gradient_sq(grid: PeriodicGrid, f: np.ndarray) -> np.ndarray:
    """``(|psi|')^2`` evaluated as ``(Re(conj(psi) psi') / |psi|)^2``.

    Zeros of ``psi`` fall back to the spectral derivative of ``|psi|``.
    """
    mod = np.abs(f)
    df = grid.diff(f, 1)
    safe = mod > 1e-150
    out = np.empty(grid.n)
    out[safe] = (np.real(np.conj(f[safe]) * df[safe]) / mod[safe]) ** 2
    if not np.all(safe):
        out[~safe] = grid.diff(mod, 1)[~safe] ** 2
    return out


def barotropic_nls_hamiltonian(psi, e: Callable[[np.ndarray], np.ndarray]) -> float:
    """``1/2 mean|psi'|^2 - 1/2 mean(|psi|'^2) + mean(e(|psi|^2) |psi|^2)``.

    The gradient difference equals ``1/8 mean(theta'^2 rho)`` for
    ``psi = sqrt(rho) exp(i theta / 2)``.
    """
    grid = psi.grid
    f = _values(psi)
    a = np.abs(f) ** 2
    grad = np.mean(np.abs(grid.diff(f, 1)) ** 2) - np.mean(modulus_gradient_sq(grid, f))
    return float(0.5 * grad + np.mean(e(a) * a))


def kinetic_gap(psi) -> float:
    """``1/2 mean|psi'|^2 - 1/2 mean(|psi|'^2)``."""
    grid = psi.grid
    f = _values(psi)
    return float(0.5 * (np.mean(np.abs(grid.diff(f, 1)) ** 2) - np.mean(modulus_gradient_sq(grid, f))))


def nls_propagator(grid: PeriodicGrid, dt: float) -> np.ndarray:
    """Fourier multiplier of the free flow ``i psi_t = -psi''`` over ``dt``."""
    return np.exp(-1j * grid.k**2 * dt)


def nls_evolve(
    psi0,
    p: NLSParams,
    dt: float,
    T: float,
    stride: Optional[int] = None,
    reference: Optional[Callable[[float], np.ndarray]] = None,
) -> Trajectory:
    """Strang split-step Fourier integration.

    Each step applies half of the pointwise phase flow of ``V + f(|psi|^2)``,
    the exact free propagator over ``dt`` and the second half phase flow.
    ``psi0`` may be a :class:`WaveFunction` or a raw :class:`ComplexField`;
    snapshots have the same type.  ``reference(t)``, when given, returns
    values compared against each snapshot by phase-aligned L2 error.
    """
    grid = psi0.grid
    steps, stride = step_schedule(dt, T, stride)
    V = p.potential(grid)
    prop = nls_propagator(grid, dt)
    f = _values(psi0).copy()
    traj = Trajectory()

    def rec(t, vals):
        state = _rewrap(psi0, grid, vals)
        diag = dict(
            hamiltonian=nls_hamiltonian(state, p),
            norm_or_mass=float(np.sqrt(np.mean(np.abs(vals) ** 2))),
        )
        if reference is not None:
            diag["correspondence_defect"] = aligned_error(vals, reference(t))[0]
        traj.record(t, state, **diag)

    rec(0.0, f)
    for i in range(1, steps + 1):
        f = f * np.exp(-0.5j * dt * (V + p.f.f(np.abs(f) ** 2)))
        f = np.fft.ifft(np.fft.fft(f) * prop)
        f = f * np.exp(-0.5j * dt * (V + p.f.f(np.abs(f) ** 2)))
        if i % stride == 0:
            rec(i * dt, f)
    return traj
