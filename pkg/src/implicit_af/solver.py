"""Implicit time stepping of the single-stage schemes on an interval.

Unknowns are interleaved per cell as ``[q_0, avg_0, q_1, avg_1, ...]`` where
``q_k`` sits at ``x_left + k*dx`` (see :meth:`StateAF.to_vector`).  Every
time step solves ``A y^{n+1} = B y^n + g^n``; ``A`` and ``B`` depend only on
the scheme, the CFL number and the grid, so ``A`` is factorized once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import GL_NODES, GL_WEIGHTS, Grid1D, StateAF, init_state
from .errors import ConfigurationError, NumericalError, SingularSymbolError, UnsupportedBoundaryError
from .schemes import RIGHT_DOFS, SchemeWeights, StencilMask, build_weights, resolve_scheme, scheme_name
from .stability import classify

log = logging.getLogger(__name__)

Signal = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# problem description


@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class SineSignal:
    """Boundary datum ``amplitude * sin(omega * t)``."""

    omega: float
    amplitude: float = 1.0

    def __call__(self, t):
        return self.amplitude * np.sin(self.omega * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ConstantSignal:
    value: float = 0.0

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)


@dataclass(frozen=True)
class Dirichlet:
    """Inflow datum ``b(t)`` at the left end."""

    signal: Signal


@dataclass(frozen=True)
class AdvectionProblem:
    speed: float
    initial_profile: object
    boundary: Union[Periodic, Dirichlet] = Periodic()

    def __post_init__(self):
        if not self.speed > 0:
            raise ConfigurationError(f"advection speed must be positive, got {self.speed}")

    @property
    def periodic(self) -> bool:
        return isinstance(self.boundary, Periodic)


def evaluate_signal(b: Signal, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    try:
        values = np.asarray(b(t), dtype=float)
    except Exception as exc:
        raise ConfigurationError(f"boundary signal could not be evaluated at t={t}: {exc}") from exc
    if values.shape != t.shape or not np.all(np.isfinite(values)):
        raise ConfigurationError(f"boundary signal returned invalid values at t={t}")
    return values


def window_average(b: Signal, t0: float, t1: float) -> float:
    """Mean of ``b`` over ``[t0, t1]`` by 5-point Gauss-Legendre."""
    t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * GL_NODES
    return float(0.5 * evaluate_signal(b, t) @ GL_WEIGHTS)


# ---------------------------------------------------------------------------
# assembly


def _index(kind: str, pos: int, n: int, periodic: bool) -> int:
    if periodic:
        pos %= n
    return 2 * pos + (1 if kind == "a" else 0)


def _place(key, anchor: int) -> Tuple[str, int]:
    """Map a residual key of the equation anchored at cell ``anchor``."""
    kind, off, _ = key
    return kind, anchor + off if kind == "a" else anchor + 1 + off


def boundary_case(mask: StencilMask) -> int:
    """Outflow treatment class: 1 upwind only, 2 implicit downwind average, 3 explicit only."""
    if mask.flags[5]:
        return 2
    if mask.flags[2]:
        return 3
    return 1


PIVOT_RTOL = 1e-13


@dataclass(eq=False)
class ImplicitSystem:
    """Factorized one-step operator ``A y^{n+1} = B y^n + g^n``."""

    weights: SchemeWeights
    grid: Grid1D
    speed: float
    dt: float
    periodic: bool
    A: sp.csr_matrix
    B: sp.csr_matrix
    # Dirichlet bookkeeping: row of the cell-0 equation carrying the boundary flux
    flux_row: Optional[int] = None
    march_order: Optional[np.ndarray] = None
    _lu: object = field(default=None, repr=False)

    @property
    def c(self) -> float:
        return self.weights.c

    @property
    def lu(self):
        if self._lu is None:
            try:
                lu = spla.splu(self.A.tocsc())
            except RuntimeError as exc:
                raise NumericalError(
                    f"implicit system of scheme {scheme_name(self.weights.mask)} is singular "
                    f"at c={self.c:.17g}: {exc}"
                ) from exc
            pivots = np.abs(lu.U.diagonal())
            if pivots.min() <= PIVOT_RTOL * pivots.max():
                raise NumericalError(
                    f"implicit system of scheme {scheme_name(self.weights.mask)} is numerically "
                    f"singular at c={self.c:.17g} (pivot ratio {pivots.min() / pivots.max():.3g})"
                )
            self._lu = lu
        return self._lu

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        y = self.lu.solve(rhs)
        if not np.all(np.isfinite(y)):
            raise NumericalError(
                f"non-finite solution for scheme {scheme_name(self.weights.mask)} at c={self.c:.17g}"
            )
        return y

    def one_step_matrix(self) -> np.ndarray:
        """Dense ``A^{-1} B`` (periodic systems only)."""
        return self.lu.solve(self.B.toarray())


def assemble(weights: SchemeWeights, grid: Grid1D, speed: float, periodic: bool = True) -> ImplicitSystem:
    """Build the global implicit system for one scheme, grid and CFL number."""
    n = grid.n_cells
    dt = weights.c * grid.dx / speed
    point_eq = weights.point_residual()
    avg_eq = weights.average_residual()
    size = 2 * n if periodic else 2 * n + 1
    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []
    brows: List[int] = []
    bcols: List[int] = []
    bvals: List[float] = []

    def emit(row: int, eq: Dict, anchor: int):
        for key, coef in eq.items():
            if coef == 0.0:
                continue
            kind, pos = _place(key, anchor)
            col = _index(kind, pos, n, periodic)
            if key[2] == 1:
                rows.append(row), cols.append(col), vals.append(coef)
            else:
                brows.append(row), bcols.append(col), bvals.append(-coef)

    flux_row = None
    march = None
    if periodic:
        for i in range(n):
            emit(_index("p", i + 2, n, True), point_eq, i)
            emit(_index("a", i, n, True), avg_eq, i)
    else:
        case = boundary_case(weights.mask)
        if case == 3:
            raise UnsupportedBoundaryError(
                f"scheme {scheme_name(weights.mask)} uses the explicit downwind average without "
                "its implicit counterpart; no outflow treatment exists for it"
            )
        if n < 3:
            raise ConfigurationError("Dirichlet problems need at least 3 cells")
        for idx in (0, 1, 2):  # q_0, avg_0, q_1 come from the boundary datum
            rows.append(idx), cols.append(idx), vals.append(1.0)
        for i in range(n - 1):
            emit(_index("p", i + 2, n, False), point_eq, i)
        if case == 2:
            # each average equation is attributed to its downwind-most implicit average
            for i in range(n - 1):
                if i == 0:
                    emit(_index("a", 1, n, False), _inflow_average_equation(weights), 0)
                else:
                    emit(_index("a", i + 1, n, False), avg_eq, i)
            flux_row = _index("a", 1, n, False)
            march = np.arange(size)
        else:
            for i in range(1, n):
                emit(_index("a", i, n, False), avg_eq, i)
            order = [0, 1, 2]
            for j in range(1, n):
                order += [2 * (j + 1), 2 * j + 1]
            march = np.array(order)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    B = sp.csr_matrix((bvals, (brows, bcols)), shape=(size, size))
    A.sum_duplicates()
    B.sum_duplicates()
    return ImplicitSystem(weights, grid, speed, dt, periodic, A, B, flux_row, march)


def _inflow_average_equation(weights: SchemeWeights) -> Dict:
    """Average update of the first cell without the reconstruction at ``x_left``.

    The flux through the inflow boundary is added exactly from ``b`` at step time.
    """
    eq = {("a", 0, 1): 1.0, ("a", 0, 0): -1.0}
    for key, w in zip(RIGHT_DOFS, weights.w_flux):
        eq[key] = eq.get(key, 0.0) + weights.c * w
    return eq


# ---------------------------------------------------------------------------
# stepping


def step_periodic(system: ImplicitSystem, state: StateAF) -> StateAF:
    if not (system.periodic and state.periodic):
        raise ConfigurationError("step_periodic needs a periodic system and state")
    y = system.solve(system.B @ state.to_vector())
    return StateAF.from_vector(y, periodic=True)


def dirichlet_rhs(system: ImplicitSystem, state: StateAF, b: Signal, t_n: float) -> np.ndarray:
    """Right-hand side including the inflow data traced back from ``b``."""
    if system.periodic or state.periodic:
        raise ConfigurationError("dirichlet steps need a bounded system and state")
    dt, dx, u = system.dt, system.grid.dx, system.speed
    if system.c < 1.0 - 1e-12:
        raise UnsupportedBoundaryError(
            f"Dirichlet inflow needs c >= 1 (got c={system.c:.6g}); traced times would leave [t^n, t^n+1]"
        )
    t1 = t_n + dt
    rhs = system.B @ state.to_vector()
    tau = dx / u
    rhs[0] = float(evaluate_signal(b, t1))
    rhs[1] = window_average(b, t1 - tau, t1)
    rhs[2] = float(evaluate_signal(b, t1 - tau))
    if system.flux_row is not None:
        # exact inflow flux replaces the reconstruction at x_left
        rhs[system.flux_row] += system.c * window_average(b, t_n, t1)
    return rhs


def march_solve(system: ImplicitSystem, rhs: np.ndarray) -> np.ndarray:
    """Solve the Dirichlet system cell by cell from the inflow end."""
    A = system.A
    y = np.zeros_like(rhs)
    known = np.zeros(rhs.size, dtype=bool)
    indptr, indices, data = A.indptr, A.indices, A.data
    for row in system.march_order:
        diag = 0.0
        acc = rhs[row]
        for k in range(indptr[row], indptr[row + 1]):
            col = indices[k]
            if col == row:
                diag = data[k]
            elif known[col]:
                acc -= data[k] * y[col]
            elif data[k] != 0.0:
                raise NumericalError(f"row {row} couples to unknown {col} ahead of the marching front")
        if abs(diag) < 1e-14:
            raise NumericalError(f"zero pivot while marching at row {row}")
        y[row] = acc / diag
        known[row] = True
    return y


def step_dirichlet(
    system: ImplicitSystem, state: StateAF, b: Signal, t_n: float, method: str = "lu"
) -> StateAF:
    """Advance a bounded state by one step; ``method`` is ``"lu"`` or ``"march"``."""
    rhs = dirichlet_rhs(system, state, b, t_n)
    if method == "march":
        y = march_solve(system, rhs)
    elif method == "lu":
        y = system.solve(rhs)
    else:
        raise ConfigurationError(f"unknown solve method {method!r}")
    return StateAF.from_vector(y, periodic=False)


# ---------------------------------------------------------------------------
# driver


def snap_time_step(speed: float, dx: float, target_cfl: float, t_final: float) -> Tuple[int, float, float]:
    """Constant step hitting ``t_final`` exactly: ``(n_steps, dt, c)``."""
    if not target_cfl > 0:
        raise ConfigurationError("target CFL must be positive")
    if t_final < 0:
        raise ConfigurationError("final time must be non-negative")
    if t_final == 0:
        return 0, target_cfl * dx / speed, target_cfl
    ratio = speed * t_final / (target_cfl * dx)
    n_steps = max(1, math.ceil(ratio - 1e-9 * max(1.0, ratio)))
    dt = t_final / n_steps
    return n_steps, dt, speed * dt / dx


@dataclass
class RunResult:
    final: StateAF
    actual_T: float
    n_steps: int
    c: float
    dt: float
    scheme: str
    mass_initial: Optional[float] = None
    mass_final: Optional[float] = None
    mass_scale: Optional[float] = None  # dx * sum |avg| at t = 0

    @property
    def mass_drift(self) -> Optional[float]:
        """Change of the total mass relative to the initial absolute mass."""
        if self.mass_initial is None:
            return None
        return abs(self.mass_final - self.mass_initial) / max(self.mass_scale, 1e-300)


def run(
    problem: AdvectionProblem,
    grid: Grid1D,
    scheme,
    target_cfl: float,
    t_final: float,
    method: str = "lu",
    initial: Optional[StateAF] = None,
) -> RunResult:
    """Integrate ``problem`` to ``t_final`` with a constant step close to ``target_cfl``."""
    mask = resolve_scheme(scheme)
    name = scheme_name(mask)
    n_steps, dt, c = snap_time_step(problem.speed, grid.dx, target_cfl, t_final)
    state = initial if initial is not None else init_state(grid, problem.initial_profile, problem.periodic)
    if state.periodic != problem.periodic:
        raise ConfigurationError("initial state layout does not match the boundary condition")
    mass0 = state.total_mass(grid.dx) if problem.periodic else None
    scale = grid.dx * float(np.abs(state.averages).sum())
    if n_steps == 0:
        return RunResult(state, 0.0, 0, c, dt, name, mass0, mass0, scale)

    weights = build_weights(mask, c)
    try:
        if classify(weights) == "unstable":
            log.warning("scheme %s is von Neumann unstable at c=%.6g", name, c)
    except SingularSymbolError as exc:
        log.warning("%s", exc)

    system = assemble(weights, grid, problem.speed, problem.periodic)
    if problem.periodic:
        for _ in range(n_steps):
            state = step_periodic(system, state)
    else:
        b = problem.boundary.signal
        for n in range(n_steps):
            state = step_dirichlet(system, state, b, n * dt, method)
    mass1 = state.total_mass(grid.dx) if problem.periodic else None
    return RunResult(state, n_steps * dt, n_steps, c, dt, name, mass0, mass1, scale)
