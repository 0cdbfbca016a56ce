"""Method-of-lines Active Flux with implicit Runge-Kutta time integration.

The averages evolve by the exact flux difference and the point values by a
third-order upwind difference using the neighbouring point value and average.
The right-hand side is linear, so every Runge-Kutta step is a single sparse
solve for all stage derivatives at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import Grid1D, StateAF, init_state
from .errors import ConfigurationError, NumericalError
from .solver import PIVOT_RTOL, AdvectionProblem, RunResult, snap_time_step

_S3 = math.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    name: str
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        s = b.size
        if A.shape != (s, s) or c.size != s:
            raise ConfigurationError(f"inconsistent tableau shapes for {self.name!r}")
        if abs(b.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"weights of {self.name!r} do not sum to one")
        for arr in (A, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def stages(self) -> int:
        return self.b.size

    def stability_function(self, z: complex) -> complex:
        """``R(z) = 1 + z b^T (I - z A)^{-1} 1`` for ``y' = lambda y``."""
        s = self.stages
        k = np.linalg.solve(np.eye(s) - z * self.A, np.ones(s))
        return complex(1 + z * self.b @ k)


_G = 0.5 + _S3 / 6

TABLEAUX: Dict[str, ButcherTableau] = {
    "backward-euler": ButcherTableau("backward-euler", [[1.0]], [1.0], [1.0]),
    "crank-nicolson": ButcherTableau("crank-nicolson", [[0.0, 0.0], [0.5, 0.5]], [0.5, 0.5], [0.0, 1.0]),
    "radau-ia": ButcherTableau("radau-ia", [[1 / 4, -1 / 4], [1 / 4, 5 / 12]], [1 / 4, 3 / 4], [0.0, 2 / 3]),
    "radau-iia": ButcherTableau("radau-iia", [[5 / 12, -1 / 12], [3 / 4, 1 / 4]], [3 / 4, 1 / 4], [1 / 3, 1.0]),
    "dirk-crouzeix": ButcherTableau("dirk-crouzeix", [[_G, 0.0], [-_S3 / 3, _G]], [0.5, 0.5], [_G, 0.5 - _S3 / 6]),
}


def get_tableau(name) -> ButcherTableau:
    if isinstance(name, ButcherTableau):
        return name
    try:
        return TABLEAUX[name]
    except KeyError:
        raise ConfigurationError(f"unknown integrator {name!r}; choose from {sorted(TABLEAUX)}") from None


def rhs_matrix(n_cells: int, u: float, dx: float) -> sp.csr_matrix:
    """Sparse operator ``L`` with ``dy/dt = L y`` in the interleaved vector layout."""
    k = np.arange(n_cells)
    pt = 2 * k  # q at x_k, the right interface of cell k - 1
    av = 2 * k + 1
    left_pt = 2 * ((k - 1) % n_cells)
    left_av = 2 * ((k - 1) % n_cells) + 1
    right_pt = 2 * ((k + 1) % n_cells)
    s = u / dx
    rows = np.concatenate([av, av, pt, pt, pt])
    cols = np.concatenate([right_pt, pt, left_pt, left_av, pt])
    vals = np.concatenate([
        np.full(n_cells, -s), np.full(n_cells, s),
        np.full(n_cells, -2 * s), np.full(n_cells, 6 * s), np.full(n_cells, -4 * s),
    ])
    return sp.csr_matrix((vals, (rows, cols)), shape=(2 * n_cells, 2 * n_cells))


def semidiscrete_rhs(state: StateAF, u: float, dx: float) -> StateAF:
    """Time derivative of both degree-of-freedom families."""
    if not state.periodic:
        raise ConfigurationError("the semi-discrete path supports periodic layouts only")
    p, a = state.point_values, state.averages
    p_left = np.roll(p, 1)
    a_left = np.roll(a, 1)
    d_avg = -u * (np.roll(p, -1) - p) / dx
    d_pt = -u * (2 * p_left - 6 * a_left + 4 * p) / dx
    return StateAF(d_avg, d_pt, periodic=True)


@dataclass(eq=False)
class IrkSystem:
    """All-stage linear system ``(I - dt A (x) L) K = 1 (x) L y`` for a fixed step."""

    tableau: ButcherTableau
    L: sp.csr_matrix
    dt: float
    _lu: object = field(default=None, repr=False)

    @property
    def lu(self):
        if self._lu is None:
            s = self.tableau.stages
            n = self.L.shape[0]
            M = sp.identity(s * n, format="csc") - self.dt * sp.kron(self.tableau.A, self.L, format="csc")
            try:
                lu = spla.splu(M.tocsc())
            except RuntimeError as exc:
                raise NumericalError(f"stage system of {self.tableau.name} is singular: {exc}") from exc
            pivots = np.abs(lu.U.diagonal())
            if pivots.min() <= PIVOT_RTOL * pivots.max():
                raise NumericalError(f"stage system of {self.tableau.name} is numerically singular")
            self._lu = lu
        return self._lu

    def step_vector(self, y: np.ndarray) -> np.ndarray:
        s = self.tableau.stages
        Ly = self.L @ y
        K = self.lu.solve(np.tile(Ly, s)).reshape(s, -1)
        y1 = y + self.dt * (self.tableau.b @ K)
        if not np.all(np.isfinite(y1)):
            raise NumericalError(f"non-finite state after a {self.tableau.name} step")
        return y1

    def one_step_matrix(self) -> np.ndarray:
        n = self.L.shape[0]
        return np.column_stack([self.step_vector(e) for e in np.eye(n)])


def irk_system(tableau, n_cells: int, u: float, dx: float, dt: float) -> IrkSystem:
    return IrkSystem(get_tableau(tableau), rhs_matrix(n_cells, u, dx), dt)


def irk_step(tableau, state: StateAF, dt: float, u: float, dx: float) -> StateAF:
    """One implicit Runge-Kutta step of the semi-discrete system."""
    if not state.periodic:
        raise ConfigurationError("the semi-discrete path supports periodic layouts only")
    system = irk_system(tableau, state.averages.size, u, dx, dt)
    return StateAF.from_vector(system.step_vector(state.to_vector()), periodic=True)


def run_semidiscrete(
    problem: AdvectionProblem,
    grid: Grid1D,
    integrator,
    target_cfl: float,
    t_final: float,
    initial: Optional[StateAF] = None,
) -> RunResult:
    tableau = get_tableau(integrator)
    if not problem.periodic:
        raise ConfigurationError("the semi-discrete path supports periodic problems only")
    n_steps, dt, c = snap_time_step(problem.speed, grid.dx, target_cfl, t_final)
    state = initial if initial is not None else init_state(grid, problem.initial_profile, True)
    mass0 = state.total_mass(grid.dx)
    scale = grid.dx * float(np.abs(state.averages).sum())
    y = state.to_vector()
    if n_steps:
        system = irk_system(tableau, grid.n_cells, problem.speed, grid.dx, dt)
        for _ in range(n_steps):
            y = system.step_vector(y)
    final = StateAF.from_vector(y, periodic=True)
    return RunResult(final, n_steps * dt, n_steps, c, dt, tableau.name, mass0, final.total_mass(grid.dx), scale)
