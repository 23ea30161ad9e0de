"""
Periodic grids and sampled fields on the circle.

Every field lives on a uniform grid ``x_j = j L / n`` and is integrated
against the normalized reference measure ``dx / L``, so that the integral of
the constant function 1 is exactly 1.  Derivatives are Fourier multipliers.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np


class GridMismatchError(ValueError):
    """Raised when two fields living on different grids are combined."""


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on a circle of circumference ``L``.

    Parameters
    ----------
    n : int
        Number of sample points; even and at least 8.
    L : float
        Circumference, ``2*pi`` by default.
    """

    n: int
    L: float = 2 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n!r}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"circumference must be positive, got {self.L!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", float(self.L))

    @cached_property
    def x(self) -> np.ndarray:
        x = np.arange(self.n) * (self.L / self.n)
        x.flags.writeable = False
        return x

    @property
    def dx(self) -> float:
        return self.L / self.n

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        k = 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        k.flags.writeable = False
        return k

    @cached_property
    def _rk(self) -> np.ndarray:
        k = 2 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)
        k.flags.writeable = False
        return k

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Signed integer mode numbers in FFT order (Nyquist reported as -n/2)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = np.abs(self.mode_index) <= self.n // 3
        mask.flags.writeable = False
        return mask

    # -- array-level spectral calculus (used by the solvers) ---------------

    def integrate(self, values: np.ndarray):
        return np.mean(values)

    def diff(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Spectral derivative of sampled values.

        The Nyquist mode is dropped for odd orders so that real data stays real.
        """
        if order < 0:
            raise ValueError("order must be non-negative")
        if order == 0:
            return np.array(values, copy=True)
        if np.iscomplexobj(values):
            mult = (1j * self.k) ** order
            if order % 2:
                mult[self.n // 2] = 0.0
            return np.fft.ifft(np.fft.fft(values) * mult)
        mult = (1j * self._rk) ** order
        if order % 2:
            mult[-1] = 0.0
        return np.fft.irfft(np.fft.rfft(values) * mult, n=self.n)

    def antiderivative(self, values: np.ndarray) -> np.ndarray:
        """Mean-zero periodic antiderivative of ``values - mean(values)``."""
        if np.iscomplexobj(values):
            vhat = np.fft.fft(values)
            k = self.k
            nyq = self.n // 2
        else:
            vhat = np.fft.rfft(values)
            k = self._rk
            nyq = len(k) - 1
        out = np.zeros_like(vhat)
        nz = k != 0
        out[nz] = vhat[nz] / (1j * k[nz])
        out[nyq] = 0.0
        if np.iscomplexobj(values):
            return np.fft.ifft(out)
        return np.fft.irfft(out, n=self.n)

    def inverse_laplacian(self, values: np.ndarray) -> np.ndarray:
        """Mean-zero solution ``u`` of ``u'' = values - mean(values)``."""
        k = self.k
        vhat = np.fft.fft(values)
        out = np.zeros_like(vhat)
        nz = k != 0
        out[nz] = -vhat[nz] / k[nz] ** 2
        res = np.fft.ifft(out)
        return res if np.iscomplexobj(values) else res.real

    def dealias(self, values: np.ndarray) -> np.ndarray:
        vhat = np.fft.fft(values)
        vhat[~self.dealias_mask] = 0.0
        res = np.fft.ifft(vhat)
        return res if np.iscomplexobj(values) else res.real

    def spectral_tail_fraction(self, values: np.ndarray) -> float:
        """Energy fraction carried by modes outside the de-aliased band."""
        power = np.abs(np.fft.fft(values)) ** 2
        total = power.sum()
        if total == 0:
            return 0.0
        return float(power[~self.dealias_mask].sum() / total)

    def interpolation_matrix(self, points: np.ndarray) -> np.ndarray:
        """Matrix evaluating the trigonometric interpolant at ``points``.

        The Nyquist term is taken as a cosine so real data interpolate to real
        values.
        """
        points = np.asarray(points, dtype=float)
        E = np.exp(1j * np.outer(points, self.k)) / self.n
        nyq = self.n // 2
        E[:, nyq] = np.cos(self.k[nyq] * points) / self.n
        return E

    def interpolate(self, values: np.ndarray, points: np.ndarray) -> np.ndarray:
        res = self.interpolation_matrix(points) @ np.fft.fft(values)
        return res if np.iscomplexobj(values) else res.real


def solve_monotone(
    func: Callable[[np.ndarray], np.ndarray],
    dfunc: Callable[[np.ndarray], np.ndarray],
    targets: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    bisect_tol: float = 1e-3,
    newton_tol: float = 1e-13,
    max_newton: int = 50,
) -> np.ndarray:
    """Solve ``func(x) = targets`` elementwise for an increasing ``func``.

    Vectorized bisection narrows each bracket ``[lo, hi]`` to ``bisect_tol``,
    then safeguarded Newton iterations polish to ``newton_tol``.
    """
    targets = np.asarray(targets, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), targets.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), targets.shape).copy()
    if np.any(func(lo) > targets) or np.any(func(hi) < targets):
        raise ValueError("targets are not bracketed by [lo, hi]")
    while np.max(hi - lo) > bisect_tol:
        mid = 0.5 * (lo + hi)
        below = func(mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(max_newton):
        d = dfunc(x)
        if np.any(d <= 0):
            raise ValueError("function is not strictly increasing")
        step = (func(x) - targets) / d
        x_new = np.clip(x - step, lo, hi)
        if np.max(np.abs(x_new - x)) < newton_tol:
            return x_new
        x = x_new
    return x


# -- field types -------------------------------------------------------------


class Field(np.lib.mixins.NDArrayOperatorsMixin):
    """Immutable samples of a function on a :class:`PeriodicGrid`.

    Arithmetic and numpy ufuncs act pointwise and return fields on the same
    grid; mixing grids raises :class:`GridMismatchError`.
    """

    __array_priority__ = 20
    _dtype: type = float

    def __init__(self, grid: PeriodicGrid, values):
        values = np.array(values, dtype=self._dtype, copy=True)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.flags.writeable = False
        self._grid = grid
        self._values = values

    @property
    def grid(self) -> PeriodicGrid:
        return self._grid

    @property
    def values(self) -> np.ndarray:
        return self._values

    @classmethod
    def from_function(cls, grid: PeriodicGrid, func: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, func(grid.x))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values.copy()
        return self._values.astype(dtype)

    def __len__(self):
        return self._grid.n

    def __repr__(self):
        return f"{type(self).__name__}(n={self._grid.n}, L={self._grid.L:.6g})"

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if "out" in kwargs:
            return NotImplemented
        grid = None
        args = []
        for item in inputs:
            if isinstance(item, Field):
                if grid is not None and item.grid != grid:
                    raise GridMismatchError("fields live on different grids")
                grid = item.grid
                args.append(item.values)
            elif isinstance(item, (numbers.Number, np.ndarray, np.generic)):
                args.append(item)
            else:
                return NotImplemented
        result = getattr(ufunc, method)(*args, **kwargs)
        if isinstance(result, tuple):
            return tuple(_wrap(grid, r) for r in result)
        return _wrap(grid, result)

    @property
    def real(self) -> "RealField":
        return RealField(self._grid, self._values.real)

    @property
    def imag(self) -> "RealField":
        return RealField(self._grid, np.imag(self._values))

    def conj(self) -> "Field":
        return _wrap(self._grid, np.conj(self._values))

    def with_values(self, values) -> "Field":
        return _wrap(self._grid, np.asarray(values))

    # -- serialization -----------------------------------------------------

    def to_csv(self, path: Union[str, Path]) -> None:
        path = Path(path)
        if np.iscomplexobj(self._values):
            data = np.column_stack([self._grid.x, self._values.real, self._values.imag])
            header = "x,re,im"
        else:
            data = np.column_stack([self._grid.x, self._values])
            header = "x,value"
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")

    def to_json(self) -> dict:
        out = {"n": self._grid.n, "L": self._grid.L}
        if np.iscomplexobj(self._values):
            out["re"] = self._values.real.tolist()
            out["im"] = self._values.imag.tolist()
        else:
            out["values"] = self._values.tolist()
        return out


class RealField(Field):
    _dtype = float

    def __init__(self, grid: PeriodicGrid, values):
        if np.iscomplexobj(values) and np.any(np.imag(values) != 0):
            raise TypeError("RealField requires real values")
        super().__init__(grid, np.real(values))


class ComplexField(Field):
    _dtype = complex


def _wrap(grid, result):
    if grid is None or not isinstance(result, np.ndarray) or result.shape != (grid.n,):
        return result
    if result.dtype == bool:
        return result
    if np.iscomplexobj(result):
        return ComplexField(grid, result)
    return RealField(grid, result)


def as_values(f) -> np.ndarray:
    return f.values if isinstance(f, Field) else np.asarray(f)


# -- operations ---------------------------------------------------------------


def integrate(f: Field):
    """Integral against the normalized measure ``dx/L`` (the sample mean)."""
    val = np.mean(f.values)
    return complex(val) if np.iscomplexobj(f.values) else float(val)


def derivative(f: Field, order: int = 1) -> Field:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return type(f)(f.grid, f.grid.diff(f.values, order))


def dealias_product(f: Field, g: Field) -> Field:
    """Pointwise product with the 2/3-rule truncation applied to the result."""
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")
    return _wrap(f.grid, f.grid.dealias(f.values * g.values))


def real_field_from_csv(path: Union[str, Path], grid: PeriodicGrid = None) -> RealField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return RealField(grid or grid_from_samples(data[:, 0]), data[:, 1])


def complex_field_from_csv(path: Union[str, Path], grid: PeriodicGrid = None) -> ComplexField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return ComplexField(grid or grid_from_samples(data[:, 0]), data[:, 1] + 1j * data[:, 2])


def field_from_json(obj, grid: PeriodicGrid = None) -> Field:
    """Rebuild a field from :meth:`Field.to_json` output or a bare list."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if isinstance(obj, list):
        if grid is None:
            raise ValueError("a bare value list needs an explicit grid")
        return _wrap(grid, np.asarray(obj, dtype=float))
    grid = grid or PeriodicGrid(obj["n"], obj.get("L", 2 * np.pi))
    if "values" in obj:
        return RealField(grid, obj["values"])
    return ComplexField(grid, np.asarray(obj["re"]) + 1j * np.asarray(obj["im"]))


def grid_from_samples(x: np.ndarray) -> PeriodicGrid:
    """Recover the grid from a column of sample points."""
    n = len(x)
    L = n * (x[-1] - x[0]) / (n - 1)
    if np.isclose(L, 2 * np.pi, rtol=1e-12, atol=0):
        L = 2 * np.pi
    return PeriodicGrid(n, L)
