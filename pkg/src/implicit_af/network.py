"""Advection on directed acyclic networks of edges.

Each edge is an interval ``[0, length]`` with its own speed and grid; all
edges share one time step.  The inflow datum of an edge is a weighted sum of
time reconstructions at the outlets of the edges entering its tail node,
so edges are advanced one after another in topological order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import Constant, Gaussian, Grid1D, Sine, StateAF, Zero, init_state
from .errors import ConfigurationError, SingularCouplingError
from .schemes import build_weights, resolve_scheme, scheme_name
from .solver import ImplicitSystem, SineSignal, assemble, snap_time_step, step_dirichlet

COUPLING_TOL = 1e-8
WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str  # node the edge leaves
    head: str  # node the edge enters
    length: float
    speed: float
    n_cells: int
    alpha: float = 1.0

    @property
    def crossing_time(self) -> float:
        return self.length / self.speed

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.n_cells, 0.0, self.length)


@dataclass(frozen=True)
class NetworkConfig:
    nodes: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    boundary: Callable = SineSignal(2 * math.pi / 3)
    initial: Dict[str, object] = field(default_factory=dict)
    reference_edge: Optional[str] = None

    def edge(self, edge_id: str) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise ConfigurationError(f"unknown edge {edge_id!r}")

    def incoming(self, node: str) -> List[Edge]:
        return [e for e in self.edges if e.head == node]

    def outgoing(self, node: str) -> List[Edge]:
        return [e for e in self.edges if e.tail == node]

    @property
    def roots(self) -> List[str]:
        heads = {e.head for e in self.edges}
        return [n for n in self.nodes if n not in heads and self.outgoing(n)]

    def topological_edges(self) -> List[Edge]:
        deps = {e.id: {f.id for f in self.incoming(e.tail)} for e in self.edges}
        order = list(TopologicalSorter(deps).static_order())
        return [self.edge(i) for i in order]

    def crossing_times(self) -> Dict[str, float]:
        return {e.id: e.crossing_time for e in self.edges}

    def refined(self, factor: int) -> "NetworkConfig":
        edges = tuple(Edge(e.id, e.tail, e.head, e.length, e.speed, e.n_cells * factor, e.alpha) for e in self.edges)
        return NetworkConfig(self.nodes, edges, self.boundary, dict(self.initial), self.reference_edge)


def validate(config: NetworkConfig, dt: Optional[float] = None) -> List[str]:
    """All problems found in ``config`` (empty when valid)."""
    errors: List[str] = []
    ids = [e.id for e in config.edges]
    for dup in sorted({i for i in ids if ids.count(i) > 1}):
        errors.append(f"edge {dup!r}: duplicate id")
    nodes = set(config.nodes)
    for e in config.edges:
        for end in (e.tail, e.head):
            if end not in nodes:
                errors.append(f"edge {e.id!r}: unknown node {end!r}")
        if not e.length > 0:
            errors.append(f"edge {e.id!r}: length must be positive, got {e.length}")
        if not e.speed > 0:
            errors.append(f"edge {e.id!r}: speed must be positive, got {e.speed}")
        if e.n_cells < 3:
            errors.append(f"edge {e.id!r}: needs at least 3 cells, got {e.n_cells}")
        if not 0.0 <= e.alpha <= 1.0:
            errors.append(f"edge {e.id!r}: coupling weight {e.alpha} outside [0, 1]")
    for node in config.nodes:
        out = config.outgoing(node)
        if out:
            total = sum(e.alpha for e in out)
            if abs(total - 1.0) > WEIGHT_SUM_TOL:
                errors.append(f"node {node!r}: coupling weights sum to {total:.17g}, not 1")
    if len(config.roots) != 1:
        errors.append(f"network needs exactly one inflow node, found {config.roots}")
    if not errors:
        try:
            config.topological_edges()
        except CycleError as exc:
            errors.append(f"network contains a cycle through {exc.args[1]}")
    for edge_id in config.initial:
        if edge_id not in ids:
            errors.append(f"initial data for unknown edge {edge_id!r}")
    if config.reference_edge is not None and config.reference_edge not in ids:
        errors.append(f"unknown reference edge {config.reference_edge!r}")
    if dt is not None and not errors:
        for e in config.edges:
            c = e.speed * dt * e.n_cells / e.length
            if c < 1.0 - 1e-12:
                errors.append(f"edge {e.id!r}: CFL number {c:.6g} < 1 is not supported at inflow boundaries")
    return errors


def check(config: NetworkConfig, dt: Optional[float] = None) -> None:
    errors = validate(config, dt)
    if errors:
        raise ConfigurationError("invalid network: " + "; ".join(errors))


# ---------------------------------------------------------------------------
# junction reconstruction


@dataclass(frozen=True, eq=False)
class TimePolynomial:
    """``p(t) = sum_j coeffs[j] * ((t - t0) / dt)**j``."""

    coeffs: np.ndarray
    t0: float
    dt: float

    def __call__(self, t):
        tau = (np.asarray(t, dtype=float) - self.t0) / self.dt
        return np.polynomial.polynomial.polyval(tau, self.coeffs)


@dataclass(frozen=True, eq=False)
class SumSignal:
    """``weight * sum(p(t) for p in parts)``."""

    parts: Tuple[Callable, ...]
    weight: float = 1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.weight * sum((p(t) for p in self.parts), np.zeros_like(t))


def junction_coefficients(order: int, c: float, q_left: float, q_out: float, q_out_new: float,
                          avg_last: Optional[float] = None) -> np.ndarray:
    """Monomial coefficients in ``tau = (t - t^n)/dt`` of the outlet reconstruction.

    ``q_left`` and ``q_out`` are the last two point values at ``t^n``,
    ``q_out_new`` the outlet value at ``t^{n+1}`` and ``avg_last`` the last
    cell average at ``t^n`` (order 4 only).
    """
    if order not in (3, 4):
        raise ConfigurationError(f"junction reconstruction order must be 3 or 4, got {order}")
    if abs(c - 1.0) <= COUPLING_TOL:
        raise SingularCouplingError(f"outlet reconstruction is singular at c={c:.17g} (needs |c - 1| > {COUPLING_TOL})")
    j = np.arange(order)
    h = 1.0 / c
    rows = [j == 0, np.ones(order), h**j]
    rhs = [q_out, q_out_new, q_left]
    if order == 4:
        if avg_last is None:
            raise ConfigurationError("order-4 reconstruction needs the last cell average")
        rows.append(c * h ** (j + 1) / (j + 1))
        rhs.append(avg_last)
    return np.linalg.solve(np.array(rows, dtype=float), np.array(rhs, dtype=float))


def junction_reconstruction(order: int, c: float, old: StateAF, new: StateAF, t_n: float, dt: float) -> TimePolynomial:
    """Outlet value of an edge as a polynomial in time over ``[t^n, t^{n+1}]``."""
    coeffs = junction_coefficients(
        order, c, old.point_values[-2], old.point_values[-1], new.point_values[-1], old.averages[-1]
    )
    return TimePolynomial(coeffs, t_n, dt)


# ---------------------------------------------------------------------------
# time stepping


@dataclass
class NetworkSolver:
    config: NetworkConfig
    scheme: object
    dt: float
    systems: Dict[str, ImplicitSystem]
    junction_order: int

    @property
    def cfl(self) -> Dict[str, float]:
        return {k: s.c for k, s in self.systems.items()}


def junction_order_for(scheme) -> int:
    """Outlet reconstruction order: matches the scheme up to 4."""
    return min(max(resolve_scheme(scheme).order, 3), 4)


def build_solver(config: NetworkConfig, scheme, dt: float) -> NetworkSolver:
    check(config, dt)
    mask = resolve_scheme(scheme)
    systems = {}
    for e in config.edges:
        c = e.speed * dt / e.grid.dx
        systems[e.id] = assemble(build_weights(mask, c), e.grid, e.speed, periodic=False)
    return NetworkSolver(config, mask, dt, systems, junction_order_for(mask))


def initial_states(config: NetworkConfig) -> Dict[str, StateAF]:
    return {e.id: init_state(e.grid, config.initial.get(e.id, Zero()), periodic=False) for e in config.edges}


def network_step(solver: NetworkSolver, states: Dict[str, StateAF], t_n: float,
                 method: str = "lu") -> Dict[str, StateAF]:
    """Advance every edge by one step, upstream edges first."""
    config, dt = solver.config, solver.dt
    new: Dict[str, StateAF] = {}
    outlets: Dict[str, TimePolynomial] = {}
    for e in config.topological_edges():
        upstream = config.incoming(e.tail)
        if upstream:
            signal = SumSignal(tuple(outlets[f.id] for f in upstream), e.alpha)
        else:
            signal = SumSignal((config.boundary,), e.alpha)
        system = solver.systems[e.id]
        new[e.id] = step_dirichlet(system, states[e.id], signal, t_n, method)
        if config.outgoing(e.head):
            outlets[e.id] = junction_reconstruction(
                solver.junction_order, system.c, states[e.id], new[e.id], t_n, dt
            )
    return new


@dataclass
class NetworkResult:
    states: Dict[str, StateAF]
    t: float
    n_steps: int
    dt: float
    cfl: Dict[str, float]
    scheme: str


def network_time_step(config: NetworkConfig, target_cfl: float, t_final: float) -> Tuple[int, float]:
    ref = config.edge(config.reference_edge) if config.reference_edge else config.outgoing(config.roots[0])[0]
    n_steps, dt, _ = snap_time_step(ref.speed, ref.grid.dx, target_cfl, t_final)
    return n_steps, dt


def run_network(config: NetworkConfig, scheme, target_cfl: float, t_final: float,
                method: str = "lu", callback: Optional[Callable] = None) -> NetworkResult:
    """Integrate the network to ``t_final``; ``callback(t, states)`` sees every step."""
    check(config)
    n_steps, dt = network_time_step(config, target_cfl, t_final)
    solver = build_solver(config, scheme, dt)
    states = initial_states(config)
    if callback:
        callback(0.0, states)
    for n in range(n_steps):
        states = network_step(solver, states, n * dt, method)
        if callback:
            callback((n + 1) * dt, states)
    return NetworkResult(states, n_steps * dt, n_steps, dt, solver.cfl, scheme_name(solver.scheme))


# ---------------------------------------------------------------------------
# exact solution


def node_value(config: NetworkConfig, node: str, t: float) -> float:
    """Total inflow arriving at ``node`` at time ``t`` (before splitting)."""
    upstream = config.incoming(node)
    if not upstream:
        if t < 0:
            raise ConfigurationError("characteristic reaches the initial data; exact solution needs larger t")
        return float(config.boundary(np.asarray(t)))
    return sum(exact_network_solution(config, t, f.id, f.length) for f in upstream)


def exact_network_solution(config: NetworkConfig, t: float, edge_id: str, x: float) -> float:
    """Value on ``edge_id`` at position ``x`` by tracing characteristics to the inflow node."""
    e = config.edge(edge_id)
    if not 0.0 <= x <= e.length:
        raise ConfigurationError(f"x={x} outside edge {edge_id!r} of length {e.length}")
    s = t - x / e.speed
    if s < 0:
        raise ConfigurationError("characteristic reaches the initial data; exact solution needs larger t")
    return e.alpha * node_value(config, e.tail, s)


def exact_edge_state(config: NetworkConfig, t: float, edge_id: str) -> StateAF:
    """Exact point values and cell averages (5-point Gauss-Legendre) on one edge."""
    from .core import GL_NODES, GL_WEIGHTS

    e = config.edge(edge_id)
    g = e.grid
    pts = np.array([exact_network_solution(config, t, edge_id, x) for x in g.interfaces()])
    avgs = np.empty(g.n_cells)
    for i, xc in enumerate(g.centers()):
        xs = xc + 0.5 * g.dx * GL_NODES
        avgs[i] = 0.5 * GL_WEIGHTS @ np.array([exact_network_solution(config, t, edge_id, x) for x in xs])
    return StateAF(avgs, pts, periodic=False)


def network_errors(config: NetworkConfig, states: Dict[str, StateAF], t: float) -> Dict[str, Dict[str, float]]:
    """Per-edge ``l1`` errors of point values (``dx``-weighted) plus the network total."""
    out: Dict[str, Dict[str, float]] = {}
    total_pts = 0.0
    total_avg = 0.0
    for e in config.edges:
        ex = exact_edge_state(config, t, e.id)
        dx = e.grid.dx
        pts = dx * float(np.abs(states[e.id].point_values - ex.point_values).sum())
        avg = dx * float(np.abs(states[e.id].averages - ex.averages).sum())
        out[e.id] = {"l1_pts": pts, "L1_avg": avg}
        total_pts += pts
        total_avg += avg
    out["total"] = {"l1_pts": total_pts, "L1_avg": total_avg}
    return out


# ---------------------------------------------------------------------------
# configuration files


_PROFILES = {
    "zero": lambda d: Zero(),
    "constant": lambda d: Constant(float(d.get("value", 0.0))),
    "gaussian": lambda d: Gaussian(float(d["center"]), float(d["width"]), float(d.get("amplitude", 1.0))),
    "sine": lambda d: Sine(float(d.get("wavenumber", 2 * math.pi)), float(d.get("amplitude", 1.0))),
}


def profile_from_dict(d: dict):
    try:
        return _PROFILES[d["type"]](d)
    except KeyError as exc:
        raise ConfigurationError(f"bad profile description {d!r}: missing {exc}") from None


def boundary_from_dict(d: dict):
    if d.get("type") != "sine":
        raise ConfigurationError(f"unsupported boundary {d!r}; only type 'sine' is available")
    return SineSignal(float(d["omega"]), float(d.get("amplitude", 1.0)))


def config_from_dict(d: dict) -> NetworkConfig:
    try:
        edges = tuple(
            Edge(str(e["id"]), str(e["from"]), str(e["to"]), float(e["length"]), float(e["speed"]),
                 int(e["n_cells"]), float(e.get("alpha", 1.0)))
            for e in d["edges"]
        )
        nodes = tuple(str(n) for n in d["nodes"])
        boundary = boundary_from_dict(d["boundary"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed network description: {exc!r}") from None
    initial = {str(item["edge"]): profile_from_dict(item["profile"]) for item in d.get("initial", [])}
    ref = d.get("reference_edge")
    return NetworkConfig(nodes, edges, boundary, initial, None if ref is None else str(ref))


def load_config(path) -> NetworkConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read network config {path}: {exc}") from None
    return config_from_dict(data)


def six_edge_config(dx: float = 1 / 8) -> dict:
    """Diamond-shaped test network whose two paths into the last edge cancel."""
    lengths = {"1": 5, "2": 20, "3": 20, "4": 30, "5": 20, "6": 30}
    speeds = {"1": 1, "2": 2, "3": 1, "4": 1, "5": 40 / 23, "6": 1}
    links = {"1": ("N0", "N1"), "2": ("N1", "N2"), "3": ("N1", "N3"),
             "4": ("N2", "N4"), "5": ("N2", "N3"), "6": ("N3", "N5")}
    alphas = {"1": 1.0, "2": 3 / 4, "3": 1 / 4, "4": 2 / 3, "5": 1 / 3, "6": 1.0}
    edges = [
        {"id": k, "from": links[k][0], "to": links[k][1], "length": lengths[k], "speed": speeds[k],
         "n_cells": int(round(lengths[k] / dx)), "alpha": alphas[k]}
        for k in lengths
    ]
    return {
        "nodes": ["N0", "N1", "N2", "N3", "N4", "N5"],
        "edges": edges,
        "boundary": {"type": "sine", "omega": 2 * math.pi / 3},
        "initial": [{"edge": "1", "profile": {"type": "gaussian", "center": 2.5, "width": 0.5}}],
        "reference_edge": "1",
    }
