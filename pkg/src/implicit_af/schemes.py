"""Single-stage implicit schemes generated from stencil masks.

At the interface ``x[i+1/2]`` a polynomial in time is fitted to a subset of
the six neighbouring degrees of freedom::

    avg[i]^n, q[i+1/2]^n, avg[i+1]^n, avg[i]^{n+1}, q[i+1/2]^{n+1}, avg[i+1]^{n+1}

Point values are matched directly, averages are matched by tracing
characteristics onto the interface, so that an average turns into a time
integral of the polynomial over a window of length ``1/c`` (in units of the
time step).  Evaluating the polynomial at ``tau = 1 - 1/c`` gives the new point
value one interface downstream, integrating it over ``[0, 1]`` gives the
numerical flux.  Both are linear functionals of the six values; their
coefficients are what :class:`SchemeWeights` stores.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

from .reference_equations import REFERENCE_EQUATIONS, DofKey
from .errors import ConfigurationError, NumericalError, SingularCflError

DOF_LABELS = ("avg_i^n", "q^n", "avg_i+1^n", "avg_i^n+1", "q^n+1", "avg_i+1^n+1")

# residual keys, see reference_equations.py for the (kind, offset, level) convention
RIGHT_DOFS: Tuple[DofKey, ...] = (
    ("a", 0, 0), ("p", 0, 0), ("a", 1, 0), ("a", 0, 1), ("p", 0, 1), ("a", 1, 1),
)
LEFT_DOFS: Tuple[DofKey, ...] = (
    ("a", -1, 0), ("p", -1, 0), ("a", 0, 0), ("a", -1, 1), ("p", -1, 1), ("a", 0, 1),
)
NEW_POINT: DofKey = ("p", 1, 1)

MAX_CONDITION = 1e12
MATCH_CFLS = (1.5, 3.0, 5.0, 7.0)
MATCH_RTOL = 1e-10


@dataclass(frozen=True)
class StencilMask:
    """Which of the six interface DOFs enter the time reconstruction."""

    flags: Tuple[bool, bool, bool, bool, bool, bool]

    def __post_init__(self):
        flags = tuple(bool(f) for f in self.flags)
        if len(flags) != 6:
            raise ConfigurationError("a stencil mask has exactly six flags")
        object.__setattr__(self, "flags", flags)

    @classmethod
    def parse(cls, text: str) -> "StencilMask":
        """Parse ``"eee|iii"``, explicit flags first (e.g. ``"010|011"``)."""
        digits = text.strip().replace("|", "")
        if len(digits) != 6 or set(digits) - {"0", "1"}:
            raise ConfigurationError(f"malformed mask string {text!r}, expected e.g. '010|011'")
        return cls(tuple(d == "1" for d in digits))

    def __str__(self) -> str:
        bits = "".join("1" if f else "0" for f in self.flags)
        return f"{bits[:3]}|{bits[3:]}"

    @property
    def indices(self) -> List[int]:
        return [k for k, f in enumerate(self.flags) if f]

    @property
    def order(self) -> int:
        return sum(self.flags)

    @property
    def uses_downwind(self) -> bool:
        return self.flags[2] or self.flags[5]


def enumerate_masks(order: int) -> List[StencilMask]:
    """All masks selecting ``order`` of the six DOFs, in lexicographic order."""
    if order not in (3, 4, 5, 6):
        raise ConfigurationError(f"order must be in 3..6, got {order}")
    masks = []
    for combo in itertools.combinations(range(6), order):
        masks.append(StencilMask(tuple(k in combo for k in range(6))))
    return masks


def all_masks() -> List[StencilMask]:
    return [m for order in (3, 4, 5, 6) for m in enumerate_masks(order)]


# ---------------------------------------------------------------------------
# weights


def _condition_row(k: int, c: float, m: int) -> np.ndarray:
    """Linear functional of condition ``k`` on the monomials ``tau**j``, j < m."""
    j = np.arange(m)
    h = 1.0 / c
    if k == 1:  # point value at t^n
        return (j == 0).astype(float)
    if k == 4:  # point value at t^{n+1}
        return np.ones(m)
    # average of tau**j over [lo, hi], hi - lo = 1/c
    lo, hi = {0: (0.0, h), 2: (-h, 0.0), 3: (1.0, 1.0 + h), 5: (1.0 - h, 1.0)}[k]
    return c * (hi ** (j + 1) - lo ** (j + 1)) / (j + 1)


def interpolation_matrix(mask: StencilMask, c: float) -> np.ndarray:
    m = mask.order
    return np.array([_condition_row(k, c, m) for k in mask.indices])


@dataclass(frozen=True, eq=False)
class SchemeWeights:
    """Point-update and flux coefficients of one mask at one CFL number.

    ``w_point`` and ``w_flux`` are indexed like :data:`DOF_LABELS`;
    ``w_flux`` is the time-averaged flux divided by the speed.
    """

    c: float
    mask: StencilMask
    w_point: np.ndarray
    w_flux: np.ndarray
    condition_number: float

    def point_residual(self) -> Dict[DofKey, float]:
        """Coefficients of ``0 = q[i+3/2]^{n+1} - sum(w_point * dofs)``."""
        res = {NEW_POINT: 1.0}
        for key, w in zip(RIGHT_DOFS, self.w_point):
            res[key] = res.get(key, 0.0) - w
        return res

    def average_residual(self) -> Dict[DofKey, float]:
        """Coefficients of the conservative average update of cell ``i``."""
        res = {("a", 0, 1): 1.0, ("a", 0, 0): -1.0}
        for key, w in zip(RIGHT_DOFS, self.w_flux):
            res[key] = res.get(key, 0.0) + self.c * w
        for key, w in zip(LEFT_DOFS, self.w_flux):
            res[key] = res.get(key, 0.0) - self.c * w
        return res


def _exact_functionals(mask: StencilMask, c: Fraction) -> Tuple[List[Fraction], List[Fraction]]:
    """Point and flux weights by Gauss-Jordan elimination over the rationals."""
    m = mask.order
    h = 1 / c
    windows = {0: (Fraction(0), h), 2: (-h, Fraction(0)), 3: (Fraction(1), 1 + h), 5: (1 - h, Fraction(1))}
    rows = []
    for k in mask.indices:
        if k == 1:
            rows.append([Fraction(int(j == 0)) for j in range(m)])
        elif k == 4:
            rows.append([Fraction(1)] * m)
        else:
            lo, hi = windows[k]
            rows.append([c * (hi ** (j + 1) - lo ** (j + 1)) / (j + 1) for j in range(m)])
    # solve M^T w = f for both functionals at once
    mt = [[rows[r][j] for r in range(m)] for j in range(m)]
    rhs = [[(1 - h) ** j, Fraction(1, j + 1)] for j in range(m)]
    for col in range(m):
        piv = next((r for r in range(col, m) if mt[r][col] != 0), None)
        if piv is None:
            raise SingularCflError(mask, float(c), np.inf)
        mt[col], mt[piv] = mt[piv], mt[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        for r in range(m):
            if r != col and mt[r][col] != 0:
                f = mt[r][col] / mt[col][col]
                mt[r] = [a - f * b for a, b in zip(mt[r], mt[col])]
                rhs[r] = [a - f * b for a, b in zip(rhs[r], rhs[col])]
    return (
        [rhs[r][0] / mt[r][r] for r in range(m)],
        [rhs[r][1] / mt[r][r] for r in range(m)],
    )


def build_weights(mask: StencilMask, c: float, exact: bool = False) -> SchemeWeights:
    """Solve the time-interpolation problem of ``mask`` at CFL number ``c``.

    With ``exact=True`` the small interpolation system is solved in rational
    arithmetic and only exactly singular systems are rejected; this is how
    very large CFL numbers (where the monomial system is ill-conditioned)
    are handled.
    """
    if not c > 0:
        raise ConfigurationError(f"CFL number must be positive, got {c}")
    M = interpolation_matrix(mask, float(c))
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(M))
    w_point = np.zeros(6)
    w_flux = np.zeros(6)
    if exact:
        wp_sel, wf_sel = _exact_functionals(mask, Fraction(c))
        w_point[mask.indices] = [float(w) for w in wp_sel]
        w_flux[mask.indices] = [float(w) for w in wf_sel]
    else:
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise SingularCflError(mask, c, cond)
        j = np.arange(mask.order)
        # p(tau) = sum_j coef_j tau**j with coef = M^{-1} dofs; evaluate functionals on coef
        at_foot = (1.0 - 1.0 / c) ** j
        integral = 1.0 / (j + 1)
        wp_sel, wf_sel = np.linalg.solve(M.T, np.stack([at_foot, integral], axis=1)).T
        w_point[mask.indices] = wp_sel
        w_flux[mask.indices] = wf_sel
    w_point.setflags(write=False)
    w_flux.setflags(write=False)
    return SchemeWeights(float(c), mask, w_point, w_flux, cond)


def is_singular(mask: StencilMask, c: float) -> bool:
    try:
        build_weights(mask, c)
    except SingularCflError:
        return True
    return False


# ---------------------------------------------------------------------------
# named schemes


def _dense(eq: Dict[DofKey, float], keys) -> np.ndarray:
    return np.array([eq.get(k, 0.0) for k in keys])


def proportional_error(x: np.ndarray, y: np.ndarray) -> float:
    """Relative distance of ``y`` from the line spanned by ``x``."""
    nx = x @ x
    if nx == 0.0:
        return 0.0 if not np.any(y) else np.inf
    s = (x @ y) / nx
    ny = np.linalg.norm(y)
    return float(np.linalg.norm(s * x - y) / (ny if ny > 0 else 1.0))


def reference_residuals(name: str, c: float) -> Tuple[Dict[DofKey, float], Dict[DofKey, float]]:
    point, average = REFERENCE_EQUATIONS[name]
    return ({k: f(c) for k, f in point.items()}, {k: f(c) for k, f in average.items()})


def reference_mismatch(mask: StencilMask, name: str, cfls=MATCH_CFLS) -> float:
    """Worst up-to-scale mismatch between generic and tabulated residuals."""
    worst = 0.0
    for c in cfls:
        try:
            w = build_weights(mask, c)
        except SingularCflError:
            continue
        ref_p, ref_a = reference_residuals(name, c)
        gen_p, gen_a = w.point_residual(), w.average_residual()
        for gen, ref in ((gen_p, ref_p), (gen_a, ref_a)):
            keys = sorted(set(gen) | set(ref))
            worst = max(worst, proportional_error(_dense(gen, keys), _dense(ref, keys)))
    return worst


def match_reference(mask: StencilMask) -> Optional[str]:
    """Name of the tabulated scheme generated by ``mask``, or ``None``."""
    hits = [name for name in REFERENCE_EQUATIONS if reference_mismatch(mask, name) <= MATCH_RTOL]
    if len(hits) > 1:
        raise NumericalError(f"mask {mask} matches several named schemes: {hits}")
    return hits[0] if hits else None


@lru_cache(maxsize=1)
def named_masks() -> Dict[str, StencilMask]:
    """Map each scheme identifier (``"3A"``..``"5C"``) to its mask."""
    table: Dict[str, StencilMask] = {}
    for mask in enumerate_masks(3) + enumerate_masks(4) + enumerate_masks(5):
        name = match_reference(mask)
        if name is not None:
            if name in table:
                raise NumericalError(f"{name} matched by {table[name]} and {mask}")
            table[name] = mask
    missing = set(REFERENCE_EQUATIONS) - set(table)
    if missing:
        raise NumericalError(f"no mask reproduces {sorted(missing)}")
    if str(table["3C"]) != "010|011":
        raise NumericalError("anchor scheme 3C does not map to mask 010|011")
    return dict(sorted(table.items()))


def resolve_scheme(scheme) -> StencilMask:
    """Accept a :class:`StencilMask`, a name like ``"4B"`` or a mask string."""
    if isinstance(scheme, StencilMask):
        return scheme
    text = str(scheme).strip()
    names = named_masks()
    if text.upper() in names:
        return names[text.upper()]
    if "|" in text or (len(text) == 6 and set(text) <= {"0", "1"}):
        mask = StencilMask.parse(text)
        if mask.order < 3:
            raise ConfigurationError(f"mask {mask} has order {mask.order} < 3")
        return mask
    raise ConfigurationError(f"unknown scheme {scheme!r}; use one of {', '.join(names)} or a mask like 010|011")


def scheme_name(mask: StencilMask) -> str:
    """Identifier of ``mask``: its tabulated name if it has one, else the mask string."""
    for name, m in named_masks().items():
        if m == mask:
            return name
    return str(mask)
