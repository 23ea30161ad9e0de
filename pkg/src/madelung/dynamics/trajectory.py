"""
Time stepping plumbing shared by the solvers: step schedules, classical RK4
and the trajectory container with its CSV diagnostics.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np


class SolverError(RuntimeError):
    """A solver could not continue (e.g. a density floor was breached)."""


def step_schedule(dt: float, T: float, stride: Optional[int] = None) -> Tuple[int, int]:
    """Number of steps and output stride for a run of length ``T``.

    ``T`` must be an integer multiple of ``dt`` (relative tolerance 1e-9).  The
    default stride gives ten output intervals when possible.
    """
    if not (dt > 0 and np.isfinite(dt)):
        raise ValueError(f"dt must be positive, got {dt!r}")
    if T < 0:
        raise ValueError(f"T must be non-negative, got {T!r}")
    steps = int(round(T / dt))
    if abs(steps * dt - T) > 1e-9 * max(T, dt):
        raise ValueError(f"T={T} is not an integer multiple of dt={dt}")
    if stride is None:
        stride = steps // 10 if steps >= 10 and steps % 10 == 0 else max(steps, 1)
    if stride < 1:
        raise ValueError("stride must be at least 1")
    if steps % stride:
        raise ValueError(f"{steps} steps are not a multiple of the output stride {stride}")
    return steps, stride


def rk4_step(rhs: Callable, y: Tuple[np.ndarray, ...], t: float, dt: float) -> Tuple[np.ndarray, ...]:
    """One classical Runge-Kutta step for a tuple of arrays."""
    k1 = rhs(t, y)
    k2 = rhs(t + dt / 2, tuple(a + dt / 2 * b for a, b in zip(y, k1)))
    k3 = rhs(t + dt / 2, tuple(a + dt / 2 * b for a, b in zip(y, k2)))
    k4 = rhs(t + dt, tuple(a + dt * b for a, b in zip(y, k3)))
    return tuple(a + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


@dataclass
class Trajectory:
    """Snapshots of a run together with per-snapshot scalar diagnostics."""

    times: List[float] = field(default_factory=list)
    states: List[Any] = field(default_factory=list)
    diagnostics: Dict[str, List[float]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def record(self, t: float, state: Any, **diag: float) -> None:
        self.times.append(float(t))
        self.states.append(state)
        for key, val in diag.items():
            self.diagnostics.setdefault(key, []).append(float(val))

    @property
    def final(self) -> Any:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.states)

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.diagnostics[name])

    def drift(self, name: str, relative: bool = False) -> float:
        """Largest deviation of a diagnostic from its initial value."""
        col = self.column(name)
        dev = float(np.max(np.abs(col - col[0])))
        return dev / max(abs(col[0]), np.finfo(float).tiny) if relative else dev

    def warn(self, message: str) -> None:
        if message not in self.warnings:
            self.warnings.append(message)

    def to_csv(self, path: Union[str, Path]) -> None:
        """Diagnostics table: ``t``, then the standard and extra columns."""
        standard = ["hamiltonian", "norm_or_mass", "correspondence_defect"]
        extra = sorted(k for k in self.diagnostics if k not in standard)
        cols = standard + extra
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + cols)
            for i, t in enumerate(self.times):
                row = [repr(t)]
                for c in cols:
                    vals = self.diagnostics.get(c)
                    row.append(repr(vals[i]) if vals is not None else "nan")
                w.writerow(row)

    def snapshots_to_csv(self, directory: Union[str, Path], stem: str = "snapshot") -> List[Path]:
        """Write each state with a ``to_csv`` method to ``stem_XXXX.csv``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for i, s in enumerate(self.states):
            target = directory / f"{stem}_{i:04d}.csv"
            if hasattr(s, "to_csv"):
                s.to_csv(target)
                paths.append(target)
        return paths
