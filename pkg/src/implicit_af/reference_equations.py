"""Closed-form residual equations of the sixteen named stable schemes.

Each entry holds two equations, both written as ``0 = sum(coef(c) * dof)``:
the point-value update (involving ``q[i+3/2]^{n+1}``) and the cell-average
update.  Keys identify a degree of freedom as ``(kind, offset, level)``:

* ``kind`` is ``"a"`` for a cell average or ``"p"`` for an interface value,
* ``offset`` is the cell index relative to ``i`` for averages, and for point
  values ``-1 -> i-1/2``, ``0 -> i+1/2``, ``1 -> i+3/2``,
* ``level`` is ``0`` for ``t^n`` and ``1`` for ``t^{n+1}``.

These tables are a verification oracle only.  The solver always derives its
weights from the generic interpolation problem in :mod:`implicit_af.schemes`.
"""

from __future__ import annotations

from typing import Callable, Dict, Tuple

DofKey = Tuple[str, int, int]
Equation = Dict[DofKey, Callable[[float], float]]

# shorthand keys
Am1n, Am1N = ("a", -1, 0), ("a", -1, 1)
A0n, A0N = ("a", 0, 0), ("a", 0, 1)
A1n, A1N = ("a", 1, 0), ("a", 1, 1)
Pm1n, Pm1N = ("p", -1, 0), ("p", -1, 1)
P0n, P0N = ("p", 0, 0), ("p", 0, 1)
P1N = ("p", 1, 1)


REFERENCE_EQUATIONS: Dict[str, Tuple[Equation, Equation]] = {
    # ---- third order -------------------------------------------------------
    "3A": (
        {
            A0N: lambda c: (c - 1) * (-1 + 3 * c),
            A1N: lambda c: 5 + (4 - 9 * c) * c,
            P0n: lambda c: -4.0,
            P1N: lambda c: -2 + 6 * c**2,
        },
        {
            Am1N: lambda c: (c - 1) ** 2 * c**2,
            A1N: lambda c: c**2 * (1 + c) ** 2,
            A0n: lambda c: 2 - 6 * c**2,
            A0N: lambda c: -2 * (c**2 - 1) * (c**2 - 1),
            Pm1n: lambda c: -2 * c * (c**2 - 1),
            P0n: lambda c: 2 * c * (c**2 - 1),
        },
    ),
    "3B": (
        {
            A1n: lambda c: -4.0,
            A0N: lambda c: c * (-1 + 3 * c),
            A1N: lambda c: -(1 + c) * (-4 + 9 * c),
            P1N: lambda c: 6 * c * (1 + c),
        },
        {
            A1n: lambda c: 2 * (c - 1),
            Am1N: lambda c: (c - 1) * c,
            A0n: lambda c: -2 * (2 + c),
            A1N: lambda c: (1 + c) * (2 + c),
            A0N: lambda c: 4 - 2 * c * (1 + c),
        },
    ),
    "3C": (
        {
            A1N: lambda c: 6 * (c - 1) * c,
            P0n: lambda c: 1.0,
            P0N: lambda c: -1 + (4 - 3 * c) * c,
            P1N: lambda c: (2 - 3 * c) * c,
        },
        {
            A1N: lambda c: -(c**3),
            A0n: lambda c: -2 + 3 * c,
            A0N: lambda c: 2 - 3 * c + c**3,
            Pm1n: lambda c: (c - 1) * c,
            Pm1N: lambda c: -((c - 1) ** 2) * c,
            P0n: lambda c: -(c - 1) * c,
            P0N: lambda c: (c - 1) ** 2 * c,
        },
    ),
    "3D": (
        {
            A1n: lambda c: 1.0,
            A1N: lambda c: -1 + 6 * c**2,
            P0N: lambda c: c - 3 * c**2,
            P1N: lambda c: -c * (1 + 3 * c),
        },
        {
            A1n: lambda c: (c - 1) * c,
            A0n: lambda c: -((1 + c) ** 2),
            A1N: lambda c: c * (1 + c) ** 2,
            A0N: lambda c: 1 + 2 * c - c**2 * (2 + c),
            Pm1N: lambda c: c * (c**2 - 1),
            P0N: lambda c: c - c**3,
        },
    ),
    "3E": (
        {
            A0n: lambda c: -4.0,
            A1N: lambda c: (13 - 9 * c) * c,
            A0N: lambda c: (c - 1) * (-4 + 3 * c),
            P1N: lambda c: 6 * (c - 1) * c,
        },
        {
            A0n: lambda c: 2 * (c - 2),
            Am1N: lambda c: (c - 2) * (c - 1),
            Am1n: lambda c: -2 * (1 + c),
            A0N: lambda c: -2 * (c - 2) * (1 + c),
            A1N: lambda c: c * (1 + c),
        },
    ),
    "3F": (
        {
            A0n: lambda c: 1.0,
            A1N: lambda c: 5 + 6 * (c - 2) * c,
            P0N: lambda c: -4 + (7 - 3 * c) * c,
            P1N: lambda c: (2 - 3 * c) * (c - 1),
        },
        {
            A0n: lambda c: (c - 2) * (c - 1),
            Am1n: lambda c: -(c**2),
            A1N: lambda c: (c - 1) * c**2,
            A0N: lambda c: -(c - 2) * (-1 + c + c**2),
            Pm1N: lambda c: (c - 2) * (c - 1) * c,
            P0N: lambda c: -(c - 2) * (c - 1) * c,
        },
    ),
    "3G": (
        {
            A1n: lambda c: -5.0,
            A0N: lambda c: -1 + 6 * c**2,
            P0N: lambda c: -(1 + c) * (-4 + 9 * c),
            P1N: lambda c: (1 + c) * (2 + 3 * c),
        },
        {
            A1n: lambda c: c**2,
            Am1N: lambda c: c**2 * (1 + c),
            A0n: lambda c: -(1 + c) * (2 + c),
            A0N: lambda c: 2 - c * (-3 + c + c**2),
            Pm1N: lambda c: -c * (1 + c) * (2 + c),
            P0N: lambda c: c * (1 + c) * (2 + c),
        },
    ),
    "3H": (
        {
            A0N: lambda c: 6 * (c - 1) * c,
            P0n: lambda c: -5.0,
            P0N: lambda c: 5 + (4 - 9 * c) * c,
            P1N: lambda c: c * (2 + 3 * c),
        },
        {
            A0n: lambda c: -2 - 3 * c,
            Am1N: lambda c: c**3,
            A0N: lambda c: 2 + 3 * c - c**3,
            Pm1n: lambda c: -c * (1 + c),
            Pm1N: lambda c: -c * (1 + c) ** 2,
            P0n: lambda c: c * (1 + c),
            P0N: lambda c: c * (1 + c) ** 2,
        },
    ),
    "3I": (
        {
            A0n: lambda c: -5.0,
            A0N: lambda c: 5 + 6 * (-2 + c) * c,
            P0N: lambda c: (13 - 9 * c) * c,
            P1N: lambda c: c * (-1 + 3 * c),
        },
        {
            A0n: lambda c: (-1 + c) ** 2,
            Am1N: lambda c: (-1 + c) ** 2 * c,
            Am1n: lambda c: -c * (1 + c),
            A0N: lambda c: -(1 + c) * (1 + (-3 + c) * c),
            Pm1N: lambda c: c - c**3,
            P0N: lambda c: c * (-1 + c**2),
        },
    ),
    # ---- fourth order ------------------------------------------------------
    "4A": (
        {
            A1n: lambda c: -1.0,
            A0N: lambda c: -(c**3),
            A1N: lambda c: 1 - c**2 * (6 + 5 * c),
            P0N: lambda c: c * (1 + c) * (-1 + 4 * c),
            P1N: lambda c: c * (1 + c) * (1 + 2 * c),
        },
        {
            A1n: lambda c: 2 * (c - 1) * c,
            A0n: lambda c: -2 * (1 + c) * (2 + c),
            A1N: lambda c: c * (1 + c) ** 2 * (2 + c),
            A0N: lambda c: -2 * (c - 1) * (2 + c) * (1 + 2 * c),
            Am1N: lambda c: c**2 - c**4,
            Pm1N: lambda c: 2 * (c - 1) * c * (1 + c) * (2 + c),
            P0N: lambda c: -2 * (c - 1) * c * (1 + c) * (2 + c),
        },
    ),
    "4B": (
        {
            A0N: lambda c: (c - 1) * c * (-1 + 2 * c),
            A1N: lambda c: (c - 1) * c * (7 + 10 * c),
            P0n: lambda c: 2.0,
            P0N: lambda c: -2 * (c - 1) * (-1 + c + 4 * c**2),
            P1N: lambda c: c * (2 - 4 * c**2),
        },
        {
            Am1N: lambda c: -((c - 1) ** 2) * c**3,
            A1N: lambda c: c**3 * (1 + c) ** 2,
            A0n: lambda c: 4 - 8 * c**2,
            A0N: lambda c: -4 * (c**2 - 1) * (c**2 - 1),
            Pm1n: lambda c: -2 * c * (c**2 - 1),
            Pm1N: lambda c: 2 * c * (c**2 - 1) * (c**2 - 1),
            P0n: lambda c: 2 * c * (c**2 - 1),
            P0N: lambda c: -2 * c * (c**2 - 1) * (c**2 - 1),
        },
    ),
    "4C": (
        {
            A0n: lambda c: -1.0,
            A0N: lambda c: -((c - 1) ** 2) * (c - 1),
            A1N: lambda c: c * (-3 + (9 - 5 * c) * c),
            P0N: lambda c: (c - 1) * c * (-5 + 4 * c),
            P1N: lambda c: (c - 1) * c * (-1 + 2 * c),
        },
        {
            A0n: lambda c: 2 * (c - 2) * (c - 1),
            Am1N: lambda c: -(c - 2) * (c - 1) ** 2 * c,
            Am1n: lambda c: -2 * c * (1 + c),
            A0N: lambda c: -2 * (c - 2) * (1 + c) * (-1 + 2 * c),
            A1N: lambda c: c**2 * (c**2 - 1),
            Pm1N: lambda c: 2 * (c - 2) * (c - 1) * c * (1 + c),
            P0N: lambda c: -2 * (c - 2) * (c - 1) * c * (1 + c),
        },
    ),
    "4D": (
        {
            A1n: lambda c: (c - 1) * (-5 + 4 * c),
            A0n: lambda c: -(1 + c) * (-1 + 4 * c),
            A0N: lambda c: (c - 1) * (1 + c * (-5 + 3 * c)),
            A1N: lambda c: -(1 + c) * (5 + c * (-17 + 9 * c)),
            P1N: lambda c: 6 * c * (c**2 - 1),
        },
        {
            Am1N: lambda c: (c - 2) * (c - 1),
            A1n: lambda c: -(c - 2) * (c - 1),
            Am1n: lambda c: -(1 + c) * (2 + c),
            A1N: lambda c: (1 + c) * (2 + c),
            A0N: lambda c: 8 - 2 * c**2,
            A0n: lambda c: 2 * (-4 + c**2),
        },
    ),
    # ---- fifth order -------------------------------------------------------
    "5A": (
        {
            A0N: lambda c: -(c - 1) * c**2 * (-1 + 5 * c**2),
            A1n: lambda c: 2 * (c - 1) * (-2 + c + 5 * c**2),
            A1N: lambda c: -(c - 1) * (1 + c) ** 2 * (-4 + 5 * c * (2 + 5 * c)),
            P0n: lambda c: -2 * c * (1 + c) * (1 + 5 * c),
            P0N: lambda c: 2 * (c - 1) * c * (1 + c) * (-3 + 5 * c * (1 + 2 * c)),
            P1N: lambda c: 2 * c * (1 + c) ** 2 * (-2 + 5 * c**2),
        },
        {
            A1n: lambda c: (c - 1) ** 2 * c**2,
            Am1N: lambda c: 0.5 * (c - 1) ** 2 * c**3,
            A1N: lambda c: -0.5 * c**2 * (1 + c) ** 2 * (2 + c),
            A0N: lambda c: (c - 1) ** 2 * (2 + c) * (2 + 3 * c),
            A0n: lambda c: -4 + c**2 * (9 - (c - 2) * c),
            Pm1n: lambda c: (c - 1) * c * (1 + c) * (2 + c),
            Pm1N: lambda c: -((c - 1) ** 2) * c * (1 + c) * (2 + c),
            P0n: lambda c: -(c - 1) * c * (1 + c) * (2 + c),
            P0N: lambda c: (c - 1) ** 2 * c * (1 + c) * (2 + c),
        },
    ),
    "5B": (
        {
            A0N: lambda c: -((c - 1) ** 2) * (4 + 5 * (c - 2) * c),
            A0n: lambda c: -2 * (-2 + c + 5 * c**2),
            A1N: lambda c: c * (-16 + c * (9 + 5 * (8 - 5 * c) * c)),
            P0n: lambda c: 2 * (c - 1) * (-4 + 5 * c),
            P0N: lambda c: 2 * (c - 1) * (-1 + 2 * c) * (-4 + 5 * (c - 1) * c),
            P1N: lambda c: 2 * (c - 1) * c * (-2 + 5 * c**2),
        },
        {
            Am1N: lambda c: (c - 2) * (c - 1) ** 2 * c**2,
            Am1n: lambda c: 2 * c**2 * (1 + c) ** 2,
            A1N: lambda c: -(c**3) * (1 + c) ** 2,
            A0N: lambda c: 2 * (c - 2) * (1 + c) ** 2 * (-2 + 3 * c),
            A0n: lambda c: -2 * (4 + c**2 * (-9 + c * (2 + c))),
            Pm1n: lambda c: -2 * (c - 2) * (c - 1) * c * (1 + c),
            Pm1N: lambda c: -2 * (c - 2) * (c - 1) * c * (1 + c) ** 2,
            P0n: lambda c: 2 * (c - 2) * (c - 1) * c * (1 + c),
            P0N: lambda c: 2 * (c - 2) * (c - 1) * c * (1 + c) ** 2,
        },
    ),
    "5C": (
        {
            A1n: lambda c: (c - 1) ** 2 * (-4 + 5 * c),
            A0n: lambda c: -c * (1 + c) * (1 + 5 * c),
            A0N: lambda c: -((c - 1) ** 2) * c * (-1 + 5 * (c - 1) * c),
            A1N: lambda c: -(1 + c) * (-4 + c * (17 + c * (-4 + 5 * c * (-8 + 5 * c)))),
            P0N: lambda c: 2 * (c - 1) * c * (1 + c) * (2 + 5 * c * (-3 + 2 * c)),
            P1N: lambda c: 2 * c * (2 - 7 * c**2 + 5 * c**4),
        },
        {
            A1n: lambda c: -(c - 2) * (c - 1) ** 2 * c,
            Am1N: lambda c: -(c - 2) * (c - 1) ** 2 * c * (1 + c),
            Am1n: lambda c: -c * (1 + c) ** 2 * (2 + c),
            A1N: lambda c: (c - 1) * c * (1 + c) ** 2 * (2 + c),
            A0N: lambda c: -8 + 26 * c**2 - 6 * c**4,
            A0n: lambda c: 2 * (4 - 5 * c**2 + c**4),
            Pm1N: lambda c: 2 * c * (4 - 5 * c**2 + c**4),
            P0N: lambda c: -2 * c * (4 - 5 * c**2 + c**4),
        },
    ),
}

NAMED_SCHEMES = tuple(REFERENCE_EQUATIONS)
