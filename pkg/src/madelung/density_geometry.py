"""
Probability densities on the circle and their cotangent bundle.

A cotangent point is a density ``rho`` together with a phase ``theta`` defined
modulo additive constants; the representative is fixed by ``mean(theta) = 0``.
Tangent vectors ``(rho_dot, theta_dot)`` carry the constraints
``mean(rho_dot) = 0`` and ``mean(theta_dot * rho) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .field_core import PeriodicGrid, RealField, as_values, grid_from_samples

DEFAULT_RHO_FLOOR = 1e-8
MASS_TOL = 1e-12
GAUGE_TOL = 1e-12


class DensityFloorError(ValueError):
    """A density dropped to or below its positivity floor."""


@dataclass(frozen=True)
class MetricScaling:
    """Rescaling constants for the metric, the Madelung phase and Fubini-Study.

    ``alpha`` scales the Sasaki-Fisher-Rao metric and the complex structure,
    ``gamma`` the Madelung phase (``psi = sqrt(rho) exp(i theta / (2 gamma))``)
    and ``beta`` the Fubini-Study Hermitian structure.  All defaults are 1.
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val!r}")

    @property
    def isometric(self) -> bool:
        """Whether the Madelung tangent map is a (rescaled) isometry."""
        return bool(np.isclose(self.alpha * self.gamma, 1.0, rtol=1e-12))

    @property
    def kaehler_compatible(self) -> bool:
        # isometry up to the common factor beta/(4 gamma), which is 1 here
        return self.isometric and bool(np.isclose(self.beta, 4 * self.gamma, rtol=1e-12))

    @property
    def pullback_factor(self) -> float:
        return self.beta / (4 * self.gamma)


@dataclass(frozen=True)
class DensityPoint:
    """A strictly positive density of unit mass against ``dx/L``."""

    rho: RealField
    floor: float = DEFAULT_RHO_FLOOR

    def __post_init__(self):
        vals = self.rho.values
        if np.min(vals) <= self.floor:
            raise DensityFloorError(
                f"density minimum {np.min(vals):.3e} is at or below floor {self.floor:.1e}"
            )
        mass = np.mean(vals)
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"density has mass {mass!r}, expected 1")

    @classmethod
    def normalized(cls, rho, grid: PeriodicGrid = None, floor: float = DEFAULT_RHO_FLOOR):
        """Rescale positive samples to unit mass."""
        if grid is None:
            grid = rho.grid
        vals = as_values(rho).astype(float)
        return cls(RealField(grid, vals / np.mean(vals)), floor)

    @property
    def grid(self) -> PeriodicGrid:
        return self.rho.grid


def gauge_theta(theta) -> RealField:
    """Canonical representative of ``theta`` modulo constants (zero mean)."""
    return RealField(theta.grid, theta.values - np.mean(theta.values))


@dataclass(frozen=True)
class CotangentPoint:
    """A point ``(rho, [theta])`` with the zero-mean representative of theta."""

    rho: DensityPoint
    theta: RealField

    def __post_init__(self):
        if self.theta.grid != self.rho.grid:
            raise ValueError("rho and theta live on different grids")
        if abs(np.mean(self.theta.values)) > GAUGE_TOL:
            raise ValueError("theta is not gauged; use CotangentPoint.gauged")

    @classmethod
    def gauged(cls, rho, theta, floor: float = DEFAULT_RHO_FLOOR) -> "CotangentPoint":
        """Build a point, normalizing ``rho`` and gauging ``theta``."""
        if not isinstance(rho, DensityPoint):
            rho = DensityPoint.normalized(rho, floor=floor)
        return cls(rho, gauge_theta(theta))

    def regauge(self) -> "CotangentPoint":
        return CotangentPoint(self.rho, gauge_theta(self.theta))

    @property
    def grid(self) -> PeriodicGrid:
        return self.rho.grid

    def to_csv(self, path: Union[str, Path]) -> None:
        data = np.column_stack([self.grid.x, self.rho.rho.values, self.theta.values])
        np.savetxt(path, data, delimiter=",", header="x,rho,theta", comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path: Union[str, Path], grid: PeriodicGrid = None) -> "CotangentPoint":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        grid = grid or grid_from_samples(data[:, 0])
        return cls.gauged(RealField(grid, data[:, 1]), RealField(grid, data[:, 2]))

    def to_json(self) -> dict:
        return {
            "n": self.grid.n,
            "L": self.grid.L,
            "rho": self.rho.rho.values.tolist(),
            "theta": self.theta.values.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CotangentPoint":
        grid = PeriodicGrid(obj["n"], obj.get("L", 2 * np.pi))
        return cls.gauged(RealField(grid, obj["rho"]), RealField(grid, obj["theta"]))


@dataclass(frozen=True)
class CotangentTangent:
    """Tangent vector ``(rho_dot, theta_dot)`` to the cotangent bundle."""

    rho_dot: RealField
    theta_dot: RealField

    def __post_init__(self):
        if abs(np.mean(self.rho_dot.values)) > GAUGE_TOL:
            raise ValueError("rho_dot must have zero mean")

    @classmethod
    def at(cls, p: CotangentPoint, rho_dot, theta_dot) -> "CotangentTangent":
        """Project raw components onto the constraints at ``p``."""
        rho = p.rho.rho.values
        rd = as_values(rho_dot).astype(float)
        td = as_values(theta_dot).astype(float)
        rd = rd - np.mean(rd)
        td = td - np.mean(td * rho)
        return cls(RealField(p.grid, rd), RealField(p.grid, td))

    def regauge(self, p: CotangentPoint) -> "CotangentTangent":
        return CotangentTangent.at(p, self.rho_dot, self.theta_dot)

    def constraint_defect(self, p: CotangentPoint) -> float:
        return float(
            max(
                abs(np.mean(self.rho_dot.values)),
                abs(np.mean(self.theta_dot.values * p.rho.rho.values)),
            )
        )

    def check_at(self, p: CotangentPoint, tol: float = GAUGE_TOL) -> None:
        defect = self.constraint_defect(p)
        if defect > tol:
            raise ValueError(f"tangent violates its constraints at this point (defect {defect:.2e})")

    def __add__(self, other: "CotangentTangent") -> "CotangentTangent":
        return CotangentTangent(self.rho_dot + other.rho_dot, self.theta_dot + other.theta_dot)

    def __mul__(self, c: float) -> "CotangentTangent":
        return CotangentTangent(self.rho_dot * c, self.theta_dot * c)

    __rmul__ = __mul__

    def __neg__(self) -> "CotangentTangent":
        return self * -1.0


def _rho(p) -> np.ndarray:
    rho = p.rho if isinstance(p, DensityPoint) else p.rho.rho
    vals = rho.values
    floor = p.floor if isinstance(p, DensityPoint) else p.rho.floor
    if np.min(vals) <= floor:
        raise DensityFloorError("density at or below floor")
    return vals


def fisher_rao(rho: DensityPoint, a: RealField, b: RealField) -> float:
    """Polarized Fisher-Rao metric ``1/4 * mean(a b / rho)``."""
    return float(0.25 * np.mean(a.values * b.values / _rho(rho)))


def sasaki_fisher_rao(
    p: CotangentPoint,
    u: CotangentTangent,
    w: CotangentTangent,
    s: MetricScaling = MetricScaling(),
) -> float:
    """Sasaki-Fisher-Rao metric with scale ``alpha``.

    ``1/4 * mean(rho_dot_u rho_dot_w / (alpha rho) + alpha theta_dot_u theta_dot_w rho)``
    """
    rho = _rho(p)
    a = s.alpha
    return float(
        0.25
        * np.mean(
            u.rho_dot.values * w.rho_dot.values / (a * rho)
            + a * u.theta_dot.values * w.theta_dot.values * rho
        )
    )


def canonical_symplectic(u: CotangentTangent, w: CotangentTangent) -> float:
    """``mean(theta_dot_u rho_dot_w - theta_dot_w rho_dot_u)``."""
    return float(
        np.mean(u.theta_dot.values * w.rho_dot.values - w.theta_dot.values * u.rho_dot.values)
    )


def complex_structure(
    p: CotangentPoint,
    u: CotangentTangent,
    s: MetricScaling = MetricScaling(),
    convention: str = "standard",
) -> CotangentTangent:
    """Almost complex structure on the cotangent bundle.

    The ``"standard"`` convention returns ``(-alpha theta_dot rho,
    rho_dot / (alpha rho))``; under the Madelung tangent map it corresponds to
    multiplication by ``i``.  ``"conjugate"`` returns the negative, which is the
    form compatible with ``canonical_symplectic`` in the order ``Omega(u, J w)``.
    """
    rho = _rho(p)
    a = s.alpha
    rd = -a * u.theta_dot.values * rho
    td = u.rho_dot.values / (a * rho)
    if convention == "conjugate":
        rd, td = -rd, -td
    elif convention != "standard":
        raise ValueError(f"unknown convention {convention!r}")
    return CotangentTangent(RealField(p.grid, rd), RealField(p.grid, td))


def compatibility_defect(
    p: CotangentPoint,
    u: CotangentTangent,
    w: CotangentTangent,
    s: MetricScaling = MetricScaling(),
) -> float:
    """``|G(u, w) - 1/4 Omega(J u, w)|`` for the scaled metric and structure."""
    ju = complex_structure(p, u, s)
    return abs(sasaki_fisher_rao(p, u, w, s) - 0.25 * canonical_symplectic(ju, w))


def sfr_geodesic_rhs(
    p: CotangentPoint, v: CotangentTangent
) -> Tuple[CotangentTangent, CotangentTangent]:
    """Right-hand side of the Sasaki-Fisher-Rao geodesic equations.

    Returns ``(d(rho, theta)/dt, d(rho_dot, theta_dot)/dt)``.  The density
    acceleration carries the multiplier of the unit-mass constraint, so that
    ``mean(rho_ddot) = 0``; ``theta_dot * rho`` is conserved.
    """
    rho = _rho(p)
    rho_ddot, theta_ddot = _sfr_accel(rho, v.rho_dot.values, v.theta_dot.values)
    acc = CotangentTangent(
        RealField(p.grid, rho_ddot - np.mean(rho_ddot)), RealField(p.grid, theta_ddot)
    )
    return v, acc


def _sfr_accel(rho, rho_dot, theta_dot):
    sq = rho_dot**2 / rho + theta_dot**2 * rho
    rho_ddot = 0.5 * sq - 0.5 * np.mean(sq) * rho
    theta_ddot = -theta_dot * rho_dot / rho
    return rho_ddot, theta_ddot


def fr_geodesic_exact(rho0: DensityPoint, rho_dot0: RealField, t: float) -> DensityPoint:
    """Closed-form Fisher-Rao geodesic through ``rho0`` with velocity ``rho_dot0``.

    ``sqrt(rho)`` moves along a great circle of the unit sphere.  Raises
    :class:`DensityFloorError` once ``t`` reaches the first zero of ``sqrt(rho)``.
    """
    rho = _rho(rho0)
    rd = rho_dot0.values
    if abs(np.mean(rd)) > GAUGE_TOL:
        raise ValueError("rho_dot0 must have zero mean")
    q0 = np.sqrt(rho)
    qd = rd / (2 * q0)
    speed = np.sqrt(np.mean(qd**2))
    if speed == 0.0:
        return rho0
    # q(t, x) = R(x) cos(speed t - phase(x)), phase in (-pi/2, pi/2)
    phase = np.arctan2(qd / speed, q0)
    t_zero = np.min((phase + np.pi / 2) / speed)
    if t >= t_zero:
        raise DensityFloorError(
            f"geodesic leaves the positive sector at t={t_zero:.6g} (requested t={t})"
        )
    q = np.cos(speed * t) * q0 + np.sin(speed * t) * qd / speed
    vals = q**2
    return DensityPoint(RealField(rho0.grid, vals / np.mean(vals)), rho0.floor)
