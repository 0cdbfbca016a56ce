"""Grid, state, profiles and error norms shared by every solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ConfigurationError

# 5-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree <= 9.
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def cell_average(func: Callable[[np.ndarray], np.ndarray], left, right) -> np.ndarray:
    """Average of ``func`` over ``[left, right]`` (arrays of cell edges)."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    x = mid[..., None] + half[..., None] * GL_NODES
    return 0.5 * (func(x) @ GL_WEIGHTS)


# ---------------------------------------------------------------------------
# grid and state


@dataclass(frozen=True)
class Grid1D:
    """Equidistant grid of ``n_cells`` cells on ``[x_left, x_right]``."""

    n_cells: int
    x_left: float = 0.0
    x_right: float = 1.0

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ConfigurationError(f"n_cells must be a positive integer, got {self.n_cells}")
        if not self.x_right > self.x_left:
            raise ConfigurationError("x_right must be larger than x_left")

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    def interfaces(self) -> np.ndarray:
        """All ``n_cells + 1`` interface positions, left to right."""
        return self.x_left + self.dx * np.arange(self.n_cells + 1)

    def centers(self) -> np.ndarray:
        return self.x_left + self.dx * (np.arange(self.n_cells) + 0.5)


@dataclass(frozen=True, eq=False)
class StateAF:
    """Cell averages and interface point values at one time level.

    ``point_values[k]`` is the value at ``x_left + k * dx``.  A periodic state
    stores ``n_cells`` point values (the right end coincides with the left
    one), a bounded state stores all ``n_cells + 1``.
    """

    averages: np.ndarray
    point_values: np.ndarray
    periodic: bool = True

    def __post_init__(self):
        avg = np.array(self.averages, dtype=float)
        pts = np.array(self.point_values, dtype=float)
        avg.setflags(write=False)
        pts.setflags(write=False)
        object.__setattr__(self, "averages", avg)
        object.__setattr__(self, "point_values", pts)
        n = avg.size
        expected = n if self.periodic else n + 1
        if avg.ndim != 1 or pts.ndim != 1 or pts.size != expected:
            raise ConfigurationError(
                f"{'periodic' if self.periodic else 'bounded'} state with {n} cells "
                f"needs {expected} point values, got {pts.size}"
            )
        if not (np.all(np.isfinite(avg)) and np.all(np.isfinite(pts))):
            raise ConfigurationError("state contains non-finite entries")

    @property
    def n_cells(self) -> int:
        return self.averages.size

    def to_vector(self) -> np.ndarray:
        """Interleave as ``[q_0, avg_0, q_1, avg_1, ...]`` (plus trailing ``q_N`` if bounded)."""
        n = self.n_cells
        y = np.empty(2 * n + (0 if self.periodic else 1))
        y[0 : 2 * n : 2] = self.point_values[:n]
        y[1 : 2 * n : 2] = self.averages
        if not self.periodic:
            y[-1] = self.point_values[-1]
        return y

    @classmethod
    def from_vector(cls, y: np.ndarray, periodic: bool) -> "StateAF":
        y = np.asarray(y, dtype=float)
        n = y.size // 2
        pts = y[0 : 2 * n : 2] if periodic else np.append(y[0 : 2 * n : 2], y[-1])
        return cls(y[1 : 2 * n : 2], pts, periodic)

    def total_mass(self, dx: float = 1.0) -> float:
        return float(dx * math.fsum(self.averages))

    def allclose(self, other: "StateAF", atol: float = 0.0, rtol: float = 1e-12) -> bool:
        return (
            self.periodic == other.periodic
            and self.n_cells == other.n_cells
            and np.allclose(self.averages, other.averages, atol=atol, rtol=rtol)
            and np.allclose(self.point_values, other.point_values, atol=atol, rtol=rtol)
        )


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Zero:
    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Constant:
    value: float = 1.0

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.value)


@dataclass(frozen=True)
class Sine:
    """``amplitude * sin(wavenumber * x)``; wavenumber 2*pi gives one period on [0, 1]."""

    wavenumber: float = 2 * math.pi
    amplitude: float = 1.0

    def __call__(self, x):
        return self.amplitude * np.sin(self.wavenumber * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Gaussian:
    """``amplitude * exp(-((x - center) / width)**2)``."""

    center: float = 0.5
    width: float = 0.1
    amplitude: float = 1.0

    def __call__(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.width
        return self.amplitude * np.exp(-(s**2))


@dataclass(frozen=True)
class JiangShuComposite:
    """Gaussian, square wave, triangle and half-ellipse on one period.

    The classic profile lives on ``[-1, 1]``; ``shift`` moves it (the default
    maps it onto ``[0, 2]``).  Outside the four bumps the profile is zero.
    """

    a: float = 0.5
    z0: float = -0.7
    delta: float = 0.005
    alpha: float = 10.0
    beta_g: float = field(default=math.log(2.0) / (36 * 0.005**2))
    shift: float = 1.0

    def __call__(self, x):
        s = np.asarray(x, dtype=float) - self.shift
        s = (s + 1.0) % 2.0 - 1.0

        def g(z):
            return np.exp(-self.beta_g * (s - z) ** 2)

        def f(a):
            return np.sqrt(np.maximum(1.0 - self.alpha**2 * (s - a) ** 2, 0.0))

        out = np.zeros_like(s)
        d = self.delta
        m = (s >= -0.8) & (s <= -0.6)
        out = np.where(m, (g(self.z0 - d) + g(self.z0 + d) + 4 * g(self.z0)) / 6, out)
        out = np.where((s >= -0.4) & (s <= -0.2), 1.0, out)
        out = np.where((s >= 0.0) & (s <= 0.2), 1.0 - np.abs(10 * (s - 0.1)), out)
        m = (s >= 0.4) & (s <= 0.6)
        out = np.where(m, (f(self.a - d) + f(self.a + d) + 4 * f(self.a)) / 6, out)
        return out


Profile = Union[Zero, Constant, Sine, Gaussian, JiangShuComposite]


def _evaluate(profile, x):
    try:
        values = np.asarray(profile(x), dtype=float)
    except Exception as exc:  # user callables may raise anything
        raise ConfigurationError(f"profile {profile!r} could not be evaluated: {exc}") from exc
    if values.shape != np.shape(x) or not np.all(np.isfinite(values)):
        raise ConfigurationError(f"profile {profile!r} returned invalid values")
    return values


def init_state(grid: Grid1D, profile, periodic: bool = True) -> StateAF:
    """Discretize ``profile``: exact point values, quadrature cell averages."""
    edges = grid.interfaces()
    pts = _evaluate(profile, edges)
    avg = cell_average(lambda x: _evaluate(profile, x), edges[:-1], edges[1:])
    if periodic:
        pts = pts[:-1]
    return StateAF(avg, pts, periodic)


def exact_advection(profile, u: float, t: float, grid: Grid1D, periodic: bool = True) -> StateAF:
    """Exact solution ``q0(x - u t)`` of a periodic problem, discretized like :func:`init_state`."""
    shift = u * t
    length = grid.length

    def moved(x):
        xs = grid.x_left + np.mod(np.asarray(x) - shift - grid.x_left, length)
        return _evaluate(profile, xs)

    return init_state(grid, moved, periodic)


def error_norms(state: StateAF, exact: StateAF, dx: float) -> dict:
    """``L1_avg``, ``l1_pts`` and ``linf_pts`` between two states of identical layout."""
    if state.periodic != exact.periodic or state.n_cells != exact.n_cells:
        raise ConfigurationError("error_norms needs states with identical layouts")
    davg = np.abs(state.averages - exact.averages)
    dpts = np.abs(state.point_values - exact.point_values)
    return {
        "L1_avg": float(dx * davg.sum()),
        "l1_pts": float(dpts.sum() / state.n_cells),
        "linf_pts": float(dpts.max(initial=0.0)),
    }
