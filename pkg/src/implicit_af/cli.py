"""Command-line front end.  Every command writes CSV files plus ``manifest.json``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .core import Constant, Gaussian, Grid1D, JiangShuComposite, Sine, StateAF, Zero, error_norms, exact_advection
from .errors import ConfigurationError, NumericalError
from .schemes import all_masks, build_weights, enumerate_masks, match_reference, named_masks, resolve_scheme, scheme_name
from .solver import AdvectionProblem, Dirichlet, Periodic, RunResult, SineSignal, run
from .stability import DEFAULT_BETAS, curves, scan_cmin, table_counts

log = logging.getLogger("implicit_af")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

PROFILES = {
    "sine": lambda length: Sine(2 * math.pi / length),
    "gaussian": lambda length: Gaussian(0.5 * length, 0.1 * length),
    "jiang-shu": lambda length: JiangShuComposite(),
    "constant": lambda length: Constant(1.0),
    "zero": lambda length: Zero(),
}
DEFAULT_LENGTH = {"jiang-shu": 2.0}


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def state_rows(grid: Grid1D, state: StateAF, t: Optional[float] = None):
    """Rows of ``(x_interface, point_value, x_center, average)``, optionally prefixed by ``t``."""
    xs = grid.interfaces()[: state.point_values.size]
    xc = grid.centers()
    for k, x in enumerate(xs):
        row = [x, state.point_values[k], xc[k] if k < xc.size else None,
               state.averages[k] if k < state.averages.size else None]
        yield ([t] if t is not None else []) + row


STATE_HEADER = ["x_interface", "point_value", "x_center", "average"]


def write_manifest(out: Path, command: str, argv: Sequence[str], started: float, outputs: List[Path], **info):
    manifest = {
        "command": command,
        "argv": list(argv),
        "version": __version__,
        "wall_time": time.perf_counter() - started,
        "outputs": [str(p) for p in outputs],
    }
    manifest.update(info)
    path = out / "manifest.json"
    out.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _problem(args) -> tuple:
    length = args.length if args.length is not None else DEFAULT_LENGTH.get(args.profile, 1.0)
    grid = Grid1D(args.cells, 0.0, length)
    profile = PROFILES[args.profile](length)
    if args.bc == "periodic":
        boundary = Periodic()
    else:
        boundary = Dirichlet(SineSignal(args.omega))
    return AdvectionProblem(args.speed, profile, boundary), grid


def _run_info(result: RunResult, grid: Grid1D) -> dict:
    return {
        "scheme": result.scheme,
        "grid": {"n_cells": grid.n_cells, "x_left": grid.x_left, "x_right": grid.x_right},
        "c": result.c,
        "dt": result.dt,
        "t_final": result.actual_T,
        "n_steps": result.n_steps,
        "mass_drift": result.mass_drift,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_run(args, argv) -> int:
    started = time.perf_counter()
    problem, grid = _problem(args)
    result = run(problem, grid, args.scheme, args.cfl, args.tfinal, method=args.method)
    out = Path(args.out)
    csv_path = write_csv(out / "state.csv", STATE_HEADER, state_rows(grid, result.final))
    write_manifest(out, "run", argv, started, [csv_path], **_run_info(result, grid))
    print(f"{result.scheme}: {result.n_steps} steps, c={result.c:.6g}, T={result.actual_T:.6g} -> {csv_path}")
    return EXIT_OK


def cmd_semidiscrete(args, argv) -> int:
    from .semidiscrete import run_semidiscrete

    started = time.perf_counter()
    if args.bc != "periodic":
        raise ConfigurationError("the semi-discrete path supports periodic problems only")
    problem, grid = _problem(args)
    result = run_semidiscrete(problem, grid, args.integrator, args.cfl, args.tfinal)
    out = Path(args.out)
    csv_path = write_csv(out / "state.csv", STATE_HEADER, state_rows(grid, result.final))
    write_manifest(out, "semidiscrete", argv, started, [csv_path], **_run_info(result, grid))
    print(f"{result.scheme}: {result.n_steps} steps, c={result.c:.6g} -> {csv_path}")
    return EXIT_OK


def convergence_orders(errors: Sequence[float]) -> List[float]:
    """Successive ``log2`` ratios; ``nan`` where undefined (first entry, zero errors)."""
    orders = [math.nan]
    for e0, e1 in zip(errors, errors[1:]):
        orders.append(math.log2(e0 / e1) if e0 > 0 and e1 > 0 else math.nan)
    return orders


def cmd_convergence(args, argv) -> int:
    started = time.perf_counter()
    rows_L1, rows_l1, info = [], [], []
    for n in args.cells:
        args_n = argparse.Namespace(**{**vars(args), "cells": n})
        problem, grid = _problem(args_n)
        if not problem.periodic:
            raise ConfigurationError("convergence studies use periodic problems")
        result = run(problem, grid, args.scheme, args.cfl, args.tfinal)
        exact = exact_advection(problem.initial_profile, problem.speed, result.actual_T, grid)
        err = error_norms(result.final, exact, grid.dx)
        rows_L1.append(err["L1_avg"])
        rows_l1.append(err["l1_pts"])
        info.append({"n_cells": n, "c": result.c, "dt": result.dt, "n_steps": result.n_steps, "t_final": result.actual_T})
    o_L1 = convergence_orders(rows_L1)
    o_l1 = convergence_orders(rows_l1)
    out = Path(args.out)
    rows = zip(args.cells, rows_L1, rows_l1, o_L1, o_l1)
    csv_path = write_csv(out / "convergence.csv", ["n_cells", "L1_avg", "l1_pts", "order_L1", "order_l1"], rows)
    write_manifest(out, "convergence", argv, started, [csv_path], scheme=scheme_name(resolve_scheme(args.scheme)), runs=info)
    for n, e, o in zip(args.cells, rows_L1, o_L1):
        print(f"N={n:5d}  L1={e:.3e}  order={o:.2f}")
    return EXIT_OK


def _schemes(names: Optional[Sequence[str]]):
    return [resolve_scheme(s) for s in names] if names else all_masks()


def cmd_stability(args, argv) -> int:
    started = time.perf_counter()
    cfls = args.cfl_step * np.arange(1, int(round(args.cfl_max / args.cfl_step)) + 1)
    reports = [scan_cmin(m, cfls) for m in _schemes(args.scheme)]
    rows = []
    for r in reports:
        windows = ";".join(f"[{fmt(lo)},{fmt(hi)}]" for lo, hi in r.windows)
        rows.append([r.scheme, str(r.mask), r.c_min, windows, int(r.marginal)])
    out = Path(args.out)
    csv_path = write_csv(out / "stability.csv", ["scheme", "mask", "c_min", "windows", "marginal"], rows)
    counts = table_counts(reports)
    write_manifest(out, "stability", argv, started, [csv_path], schemes=[r.scheme for r in reports],
                   counts=counts, cfl_grid={"step": args.cfl_step, "max": args.cfl_max})
    for r in reports:
        print(f"{r.scheme:>8}  c_min={fmt(r.c_min) or 'none':<22} marginal={r.marginal}")
    print(json.dumps(counts, default=_jsonable))
    return EXIT_OK


def cmd_curves(args, argv) -> int:
    started = time.perf_counter()
    betas = np.pi * np.arange(args.samples) / (args.samples - 1)
    rows, halves = [], {}
    for mask in _schemes(args.scheme):
        name = scheme_name(mask)
        curve = curves(build_weights(mask, args.cfl), betas)
        other = np.where(np.isclose(curve.z[:, 0], curve.physical, rtol=0, atol=0), curve.z[:, 1], curve.z[:, 0])
        halves[name] = curve.beta_half
        for k, beta in enumerate(betas):
            rows.append([name, curve.c, beta, abs(curve.physical[k]), abs(other[k]), curve.dispersion[k]])
    out = Path(args.out)
    csv_path = write_csv(out / "curves.csv", ["scheme", "c", "beta", "abs_z1", "abs_z2", "dispersion"], rows)
    write_manifest(out, "curves", argv, started, [csv_path], c=args.cfl, beta_half=halves)
    for name, bh in halves.items():
        print(f"{name:>8}  beta_half={bh:.4f}")
    return EXIT_OK


def cmd_enumerate(args, argv) -> int:
    started = time.perf_counter()
    rows = [[str(m), m.order, match_reference(m) or ""] for m in enumerate_masks(args.order)]
    out = Path(args.out)
    csv_path = write_csv(out / f"masks_order{args.order}.csv", ["mask", "order", "name"], rows)
    write_manifest(out, "enumerate", argv, started, [csv_path], order=args.order)
    for mask, _, name in rows:
        print(f"{mask}  {name}")
    return EXIT_OK


def cmd_network(args, argv) -> int:
    from .network import config_from_dict, load_config, network_errors, run_network, six_edge_config

    started = time.perf_counter()
    config = load_config(args.config) if args.config else config_from_dict(six_edge_config(args.dx))
    times = sorted(set(args.output_times or [args.tfinal]))
    snapshots: Dict[float, dict] = {}
    tol = 1e-9 * max(1.0, args.tfinal)

    def keep(t, states):
        for want in times:
            if abs(t - want) <= tol:
                snapshots[want] = states

    result = run_network(config, args.scheme, args.cfl, args.tfinal, callback=keep)
    missing = [t for t in times if t not in snapshots]
    if missing:
        log.warning("output times %s do not fall on the time grid (dt=%.6g)", missing, result.dt)
    out = Path(args.out)
    paths = []
    for e in config.edges:
        rows = []
        for t in sorted(snapshots):
            rows.extend(state_rows(e.grid, snapshots[t][e.id], t))
        paths.append(write_csv(out / f"edge_{e.id}.csv", ["t"] + STATE_HEADER, rows))
    info = {"scheme": result.scheme, "dt": result.dt, "n_steps": result.n_steps, "t_final": result.t,
            "cfl_per_edge": result.cfl, "edges": {e.id: e.n_cells for e in config.edges}}
    if args.errors:
        info["errors"] = network_errors(config, result.states, result.t)
    write_manifest(out, "network", argv, started, paths, **info)
    for e in config.edges:
        peak = float(np.abs(result.states[e.id].point_values).max())
        print(f"edge {e.id}: c={result.cfl[e.id]:.6g}  max|q|={peak:.3e}")
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
        old = manifest["argv"]
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigurationError(f"cannot replay {args.manifest}: {exc}") from None
    return main(old)


# ---------------------------------------------------------------------------
# parser


def _add_problem_flags(p: argparse.ArgumentParser, integrator: bool = False, grids: bool = False):
    if grids:
        p.add_argument("--cells", type=int, nargs="+", default=[20, 40, 80, 160, 320, 640])
    else:
        p.add_argument("--cells", type=int, default=100)
    p.add_argument("--cfl", type=float, default=3.0, help="target CFL number; the step is snapped to hit --tfinal")
    p.add_argument("--tfinal", type=float, default=1.0)
    p.add_argument("--profile", choices=sorted(PROFILES), default="sine")
    p.add_argument("--length", type=float, default=None, help="domain length (default 1, or 2 for jiang-shu)")
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--bc", choices=["periodic", "dirichlet"], default="periodic")
    p.add_argument("--omega", type=float, default=2 * math.pi, help="angular frequency of the sine inflow")
    p.add_argument("--out", default="out")
    if integrator:
        p.add_argument("--integrator", required=True,
                       choices=["backward-euler", "crank-nicolson", "radau-ia", "radau-iia", "dirk-crouzeix"])
    else:
        p.add_argument("--scheme", required=True, help="named scheme (e.g. 4B) or mask such as 010|011")
        p.add_argument("--method", choices=["lu", "march"], default="lu")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="implicit-af", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single-stage implicit scheme on one interval")
    _add_problem_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("semidiscrete", help="method of lines with an implicit Runge-Kutta integrator")
    _add_problem_flags(p, integrator=True)
    p.set_defaults(func=cmd_semidiscrete)

    p = sub.add_parser("convergence", help="error norms and orders over a grid sequence")
    _add_problem_flags(p, grids=True)
    p.set_defaults(func=cmd_convergence, tfinal=10.0)

    p = sub.add_parser("stability", help="von Neumann scan over CFL numbers")
    p.add_argument("--scheme", action="append", help="repeatable; default all 42 masks")
    p.add_argument("--cfl-step", type=float, default=0.05)
    p.add_argument("--cfl-max", type=float, default=10.0)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("curves", help="diffusion and dispersion curves")
    p.add_argument("--scheme", action="append", help="repeatable; default all 42 masks")
    p.add_argument("--cfl", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=len(DEFAULT_BETAS))
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("enumerate", help="list stencil masks of one order")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("network", help="advection on an edge network")
    p.add_argument("--config", help="JSON network description (default: built-in six-edge network)")
    p.add_argument("--dx", type=float, default=1 / 8, help="cell size of the built-in network")
    p.add_argument("--scheme", default="4B")
    p.add_argument("--cfl", type=float, default=5.0, help="CFL number on the reference edge")
    p.add_argument("--tfinal", type=float, default=70.0)
    p.add_argument("--output-times", type=float, nargs="+")
    p.add_argument("--errors", action="store_true", help="report errors against the characteristic solution")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args, argv)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
