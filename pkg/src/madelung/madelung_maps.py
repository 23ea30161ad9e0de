"""
The Madelung transform, its inverse as a momentum map, and the action of the
semidirect product of circle diffeomorphisms with phase functions on wave
functions (viewed as half-densities).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .density_geometry import (
    CotangentPoint,
    CotangentTangent,
    DensityFloorError,
    DensityPoint,
    MetricScaling,
    _rho,
)
from .field_core import (
    ComplexField,
    Field,
    GridMismatchError,
    PeriodicGrid,
    RealField,
    solve_monotone,
)
from .wave_geometry import ProjectiveTangent, WaveFunction

WINDING_TOL = 1e-8


class WindingError(ValueError):
    """The phase gradient ``m / rho`` has nonzero mean, so no periodic phase exists."""


class NotADiffeomorphismError(ValueError):
    pass


# -- types ------------------------------------------------------------------


@dataclass(frozen=True)
class Momentum:
    """Element ``(m, rho)`` of the dual of the semidirect-product algebra.

    ``components`` holds the individual densities of a multicomponent state,
    which must sum to ``rho``.  Unit mass is not enforced: the inverse
    transform is defined on all wave functions, normalized or not.
    """

    m: RealField
    rho: RealField
    components: Optional[Tuple[RealField, ...]] = None

    def __post_init__(self):
        if self.m.grid != self.rho.grid:
            raise GridMismatchError("m and rho live on different grids")
        scale = max(1.0, float(np.max(np.abs(self.rho.values))))
        if np.min(self.rho.values) < -1e-14 * scale:
            raise ValueError("rho must be non-negative")
        if self.components is not None:
            total = np.sum([c.values for c in self.components], axis=0)
            if np.max(np.abs(total - self.rho.values)) > 1e-10 * scale:
                raise ValueError("component densities do not sum to rho")

    @property
    def grid(self) -> PeriodicGrid:
        return self.rho.grid

    @property
    def mass(self) -> float:
        return float(np.mean(self.rho.values))

    def to_csv(self, path: Union[str, Path]) -> None:
        cols = [self.grid.x, self.m.values, self.rho.values]
        header = ["x", "m", "rho"]
        for k, c in enumerate(self.components or ()):
            cols.append(c.values)
            header.append(f"rho_{k}")
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=",".join(header),
                   comments="", fmt="%.17g")


@dataclass(frozen=True)
class AlgebraElement:
    """``xi = (v, alpha)``: a vector field ``v d/dx`` and phase generator(s)."""

    v: RealField
    alpha: Union[RealField, Tuple[RealField, ...]]

    @property
    def alphas(self) -> Tuple[RealField, ...]:
        return self.alpha if isinstance(self.alpha, tuple) else (self.alpha,)

    @classmethod
    def zero(cls, grid: PeriodicGrid, components: int = 1) -> "AlgebraElement":
        z = RealField(grid, np.zeros(grid.n))
        return cls(z, z if components == 1 else (z,) * components)

    def scaled(self, c: float) -> "AlgebraElement":
        alpha = tuple(a * c for a in self.alphas)
        return AlgebraElement(self.v * c, alpha if isinstance(self.alpha, tuple) else alpha[0])


@dataclass(frozen=True)
class GroupElement:
    """``(phi, a)`` with ``phi(x) = x + displacement(x)`` orientation preserving."""

    displacement: RealField
    a: Union[RealField, Tuple[RealField, ...]]

    def __post_init__(self):
        grid = self.displacement.grid
        dphi = 1.0 + grid.diff(self.displacement.values, 1)
        if np.min(dphi) <= 0:
            raise NotADiffeomorphismError(
                f"phi' has minimum {np.min(dphi):.3e}; the map is not invertible"
            )

    @property
    def phases(self) -> Tuple[RealField, ...]:
        return self.a if isinstance(self.a, tuple) else (self.a,)

    @classmethod
    def identity(cls, grid: PeriodicGrid) -> "GroupElement":
        z = RealField(grid, np.zeros(grid.n))
        return cls(z, z)


# -- the transform ------------------------------------------------------------


def madelung_forward(p: CotangentPoint, s: MetricScaling = MetricScaling()) -> WaveFunction:
    """``psi = sqrt(rho) exp(i theta / (2 gamma))``."""
    rho = _rho(p)
    vals = np.sqrt(rho) * np.exp(1j * p.theta.values / (2 * s.gamma))
    return WaveFunction(ComplexField(p.grid, vals))


def madelung_tangent(
    p: CotangentPoint, u: CotangentTangent, s: MetricScaling = MetricScaling()
) -> ProjectiveTangent:
    """``psi_dot = 1/2 (rho_dot / rho + i theta_dot / gamma) psi``."""
    rho = _rho(p)
    psi = madelung_forward(p, s)
    vals = 0.5 * (u.rho_dot.values / rho + 1j * u.theta_dot.values / s.gamma) * psi.values
    return ProjectiveTangent(psi, ComplexField(p.grid, vals))


def madelung_inverse(psi) -> Momentum:
    """``(m, rho) = (2 Im(conj(psi) psi'), |psi|^2)``; vanishing psi is allowed."""
    f = _complex_values(psi)
    grid = psi.grid
    m = 2 * np.imag(np.conj(f) * grid.diff(f, 1))
    return Momentum(RealField(grid, m), RealField(grid, np.abs(f) ** 2))


def recover_theta(
    mom: Momentum,
    s: MetricScaling = MetricScaling(),
    floor: float = 1e-8,
    winding_tol: float = WINDING_TOL,
) -> CotangentPoint:
    """Integrate ``theta' = gamma m / rho`` back to a gauged cotangent point.

    Raises :class:`WindingError` when ``m / rho`` has nonzero mean, i.e. the
    phase winds around the circle and has no single-valued representative.
    """
    rho = mom.rho.values
    if np.min(rho) <= floor:
        raise DensityFloorError("cannot recover a phase where the density vanishes")
    if abs(np.mean(rho) - 1.0) > 1e-10:
        raise ValueError(f"momentum has mass {np.mean(rho)!r}, expected 1")
    grad = s.gamma * mom.m.values / rho
    winding = np.mean(grad)
    if abs(winding) > winding_tol:
        raise WindingError(
            f"phase gradient has mean {winding:.6g}: total phase change "
            f"{winding * mom.grid.L:.6g} over the circle is not zero"
        )
    theta = mom.grid.antiderivative(grad)
    return CotangentPoint.gauged(DensityPoint.normalized(mom.rho, floor=floor),
                                 RealField(mom.grid, theta))


def multicomponent_inverse(psis: Sequence[ComplexField]) -> Momentum:
    """``m = 2 sum_k Im(conj(psi_k) psi_k')`` and ``rho_k = |psi_k|^2``."""
    if len(psis) < 1:
        raise ValueError("need at least one component")
    grid = psis[0].grid
    m = np.zeros(grid.n)
    comps = []
    for psi in psis:
        if psi.grid != grid:
            raise GridMismatchError("components live on different grids")
        f = _complex_values(psi)
        m = m + 2 * np.imag(np.conj(f) * grid.diff(f, 1))
        comps.append(RealField(grid, np.abs(f) ** 2))
    rho = comps[0] if len(comps) == 1 else RealField(grid, np.sum([c.values for c in comps], axis=0))
    return Momentum(RealField(grid, m), rho, tuple(comps))


# -- group and algebra actions ---------------------------------------------------


def inverse_diffeomorphism(displacement: RealField) -> Tuple[np.ndarray, np.ndarray]:
    """Points ``phi^{-1}(x_j)`` and the derivative ``phi'`` there.

    Each grid point is solved by bracketed bisection followed by Newton.
    """
    grid = displacement.grid
    d = displacement.values
    dd = grid.diff(d, 1)
    dhat = np.fft.fft(d)
    ddhat = np.fft.fft(dd)

    def phi(x):
        return x + np.real(grid.interpolation_matrix(x) @ dhat)

    def dphi(x):
        return 1.0 + np.real(grid.interpolation_matrix(x) @ ddhat)

    bound = np.sum(np.abs(dhat)) / grid.n + 1e-9
    y = grid.x
    xinv = solve_monotone(phi, dphi, y, y - bound, y + bound)
    jac = dphi(xinv)
    if np.min(jac) <= 0:
        raise NotADiffeomorphismError("phi' is not positive")
    return xinv, jac


def group_action(g: GroupElement, psi) -> Union[ComplexField, Tuple[ComplexField, ...]]:
    """``(phi, a) . psi = sqrt(1/phi'(phi^{-1})) exp(-i a/2) psi(phi^{-1})``.

    A sequence of components is acted on with the matching phases ``a_k``.
    """
    multi = not isinstance(psi, Field)
    comps = list(psi) if multi else [psi]
    phases = g.phases
    if len(phases) == 1 and len(comps) > 1:
        phases = phases * len(comps)
    if len(phases) != len(comps):
        raise ValueError("number of phase functions does not match components")
    grid = g.displacement.grid
    if np.all(g.displacement.values == 0):
        xinv, jac = grid.x, np.ones(grid.n)
        pulled = [_complex_values(c) for c in comps]
    else:
        xinv, jac = inverse_diffeomorphism(g.displacement)
        E = grid.interpolation_matrix(xinv)
        pulled = [E @ np.fft.fft(_complex_values(c)) for c in comps]
    out = tuple(
        ComplexField(grid, np.exp(-0.5j * a.values) * f / np.sqrt(jac))
        for a, f in zip(phases, pulled)
    )
    return out if multi else out[0]


def infinitesimal_action(xi: AlgebraElement, psi):
    """``V_xi(psi) = -1/2 psi v' - i/2 alpha psi - v psi'`` (componentwise)."""
    comps, multi = _components(psi)
    grid = xi.v.grid
    v = xi.v.values
    dv = grid.diff(v, 1)
    alphas = _match(xi.alphas, len(comps))
    out = tuple(
        ComplexField(grid, -0.5 * f * dv - 0.5j * a.values * f - v * grid.diff(f, 1))
        for a, f in zip(alphas, comps)
    )
    return out if multi else out[0]


def exp_algebra(xi: AlgebraElement, eps: float) -> GroupElement:
    """First-order group element ``(x + eps v, eps alpha)``.

    Exact to first order in ``eps``; even-order discrepancies with the true
    exponential cancel in central differences.
    """
    alpha = tuple(a * eps for a in xi.alphas)
    return GroupElement(xi.v * eps, alpha if isinstance(xi.alpha, tuple) else alpha[0])


# -- momentum map -----------------------------------------------------------------


def momentum_hamiltonian(psi, xi: AlgebraElement) -> float:
    """``H_xi(psi) = <M(psi), xi> = mean(sum_k rho_k alpha_k + m v)``."""
    comps, _ = _components(psi)
    grid = xi.v.grid
    alphas = _match(xi.alphas, len(comps))
    total = 0.0
    for a, f in zip(alphas, comps):
        rho = np.abs(f) ** 2
        m = 2 * np.imag(np.conj(f) * grid.diff(f, 1))
        total += np.mean(rho * a.values + m * xi.v.values)
    return float(total)


def momentum_gradient(psi, xi: AlgebraElement, method: str = "closed", eps: float = 1e-5):
    """Gradient of ``H_xi`` for the real inner product ``Re <., .>``.

    ``"closed"`` uses ``2 psi alpha - 2i psi v' - 4i v psi'``; ``"fd"`` builds
    it from central differences of :func:`momentum_hamiltonian` along every
    real and imaginary grid direction.
    """
    comps, multi = _components(psi)
    grid = xi.v.grid
    v = xi.v.values
    alphas = _match(xi.alphas, len(comps))
    if method == "closed":
        dv = grid.diff(v, 1)
        out = tuple(
            ComplexField(grid, 2 * f * a.values - 2j * f * dv - 4j * v * grid.diff(f, 1))
            for a, f in zip(alphas, comps)
        )
    elif method == "fd":
        out = tuple(
            ComplexField(grid, _fd_gradient(grid, f, a.values, v, eps))
            for a, f in zip(alphas, comps)
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    return out if multi else out[0]


def _fd_gradient(grid, f, alpha, v, eps):
    n = grid.n
    k = grid.k.copy()
    k[n // 2] = 0.0

    def batch_h(F):
        dF = np.fft.ifft(np.fft.fft(F, axis=1) * (1j * k), axis=1)
        return np.mean(np.abs(F) ** 2 * alpha + 2 * np.imag(np.conj(F) * dF) * v, axis=1)

    eye = np.eye(n)
    re = (batch_h(f + eps * eye) - batch_h(f - eps * eye)) / (2 * eps)
    im = (batch_h(f + 1j * eps * eye) - batch_h(f - 1j * eps * eye)) / (2 * eps)
    return n * (re + 1j * im)


def hamiltonian_vector_field(grad) -> ComplexField:
    """``X_H = -i dH`` for the canonical structure on wave functions."""
    return ComplexField(grad.grid, -1j * grad.values)


def verify_momentum_map(psi, xi: AlgebraElement, method: str = "closed", eps: float = 1e-5) -> float:
    """L2 norm of ``X_{H_xi}(psi) - 4 V_xi(psi)`` (summed over components)."""
    grads, _ = _components(momentum_gradient(psi, xi, method, eps))
    vs, _ = _components(infinitesimal_action(xi, psi))
    sq = 0.0
    for g, vf in zip(grads, vs):
        sq += np.mean(np.abs(-1j * g - 4 * vf) ** 2)
    return float(np.sqrt(sq))


def poisson_bracket(grad_f, grad_g) -> float:
    """``{F, G} = Re <dF, -i dG>`` summed over components."""
    fs, _ = _components(grad_f)
    gs, _ = _components(grad_g)
    return float(sum(np.mean(np.real(a * np.conj(-1j * b))) for a, b in zip(fs, gs)))


def algebra_bracket(xi: AlgebraElement, eta: AlgebraElement, sign: int = 1) -> AlgebraElement:
    """``sign * ([v1, v2], v1 alpha2' - v2 alpha1')`` with ``[v1, v2] = v1 v2' - v2 v1'``."""
    grid = xi.v.grid
    v1, v2 = xi.v.values, eta.v.values
    bv = v1 * grid.diff(v2, 1) - v2 * grid.diff(v1, 1)
    a1s, a2s = xi.alphas, eta.alphas
    if len(a1s) != len(a2s):
        raise ValueError("algebra elements have different numbers of components")
    ba = tuple(
        RealField(grid, sign * (v1 * grid.diff(a2.values, 1) - v2 * grid.diff(a1.values, 1)))
        for a1, a2 in zip(a1s, a2s)
    )
    alpha = ba if isinstance(xi.alpha, tuple) else ba[0]
    return AlgebraElement(RealField(grid, sign * bv), alpha)


def _equivariance_gap(psi, xi, eta, sign: int) -> float:
    lhs = momentum_hamiltonian(psi, algebra_bracket(xi, eta, sign))
    pb = poisson_bracket(momentum_gradient(psi, xi), momentum_gradient(psi, eta))
    # the momentum map property holds for the Poisson structure scaled by 1/4
    return abs(lhs - 0.25 * pb)


@lru_cache(maxsize=None)
def bracket_sign(grid: PeriodicGrid) -> int:
    """Global sign of the algebra bracket, calibrated on a fixed pair.

    The calibration pair mixes the diffeomorphism and phase parts so that both
    sides of the equivariance identity are nonzero.
    """
    x = grid.x
    psi = ComplexField(grid, (1.0 + 0.3 * np.cos(x)) * np.exp(1j * np.sin(x)))
    xi = AlgebraElement(RealField(grid, np.sin(x)), RealField(grid, 0.5 * np.cos(2 * x)))
    eta = AlgebraElement(RealField(grid, 0.7 * np.cos(x)), RealField(grid, np.sin(x)))
    gaps = {s: _equivariance_gap(psi, xi, eta, s) for s in (1, -1)}
    return min(gaps, key=gaps.get)


def lie_poisson_defect(psi, xi: AlgebraElement, eta: AlgebraElement) -> float:
    """``|H_[xi,eta](psi) - {H_xi, H_eta}(psi) / 4|`` with the calibrated bracket sign."""
    return _equivariance_gap(psi, xi, eta, bracket_sign(xi.v.grid))


# -- helpers ---------------------------------------------------------------------


def _complex_values(psi) -> np.ndarray:
    if isinstance(psi, WaveFunction):
        return psi.psi.values
    return np.asarray(psi.values, dtype=complex)


def _components(psi):
    if isinstance(psi, (Field, WaveFunction)):
        return [_complex_values(psi)], False
    return [_complex_values(c) for c in psi], True


def _match(alphas, n):
    if len(alphas) == n:
        return alphas
    if len(alphas) == 1:
        return alphas * n
    raise ValueError("number of phase generators does not match components")
