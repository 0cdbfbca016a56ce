"""Von Neumann analysis of the single-stage schemes.

Inserting a Fourier mode ``Q_i = (q[i+1/2], avg[i]) = Qhat * exp(1j*beta*i)``
into the point and average updates gives ``A(beta) Qhat^{n+1} = B(beta) Qhat^n``
with 2x2 matrices.  The amplification factors are the roots of the quadratic
``det(B - z A) = 0``; there is no need to invert ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import Grid1D
from .errors import NumericalError, SingularCflError, SingularSymbolError
from .schemes import SchemeWeights, StencilMask, build_weights, resolve_scheme, scheme_name

DEFAULT_BETAS = np.pi * np.arange(1025) / 1024
DEFAULT_CFLS = 0.05 * np.arange(1, 201)
STABILITY_TOL = 1e-10
MARGINAL_FRACTION = 0.1
HALF_WIDTH_LEVEL = 0.995
SINGULAR_RTOL = 1e-13
DOUBLE_ROOT_RTOL = 64 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class FourierSymbol:
    beta: float
    A: np.ndarray
    B: np.ndarray


def symbol_matrices(weights: SchemeWeights, betas) -> Tuple[np.ndarray, np.ndarray]:
    """Stacked ``A(beta)`` and ``B(beta)`` of shape ``(len(betas), 2, 2)``."""
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    A = np.zeros((betas.size, 2, 2), dtype=complex)
    B = np.zeros_like(A)
    for r, eq in enumerate((weights.point_residual(), weights.average_residual())):
        for (kind, off, level), coef in eq.items():
            col = 0 if kind == "p" else 1
            term = coef * np.exp(1j * betas * off)
            if level == 1:
                A[:, r, col] += term
            else:
                B[:, r, col] -= term
    return A, B


def fourier_symbol(weights: SchemeWeights, beta: float) -> FourierSymbol:
    A, B = symbol_matrices(weights, [beta])
    return FourierSymbol(float(beta), A[0], B[0])


def _quadratic(A: np.ndarray, B: np.ndarray):
    """Coefficients of ``det(B - z A) = a z**2 + b z + d``."""
    a = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    b = -(A[..., 0, 0] * B[..., 1, 1] + A[..., 1, 1] * B[..., 0, 0]
          - A[..., 0, 1] * B[..., 1, 0] - A[..., 1, 0] * B[..., 0, 1])
    d = B[..., 0, 0] * B[..., 1, 1] - B[..., 0, 1] * B[..., 1, 0]
    return a, b, d


def _quadratic_roots(a, b, d):
    """Both roots per entry; cancellation-free form.  Entries with ``a == 0`` give garbage.

    A discriminant at rounding level means a double root; its square root would
    inflate the rounding error to ``sqrt(eps)``, so such pairs are merged at ``-b/2a``.
    """
    delta = b * b - 4 * a * d
    double = np.abs(delta) <= DOUBLE_ROOT_RTOL * (np.abs(b) ** 2 + 4 * np.abs(a * d))
    delta = np.where(double, 0.0, delta)
    disc = np.sqrt(delta)
    disc = np.where((np.conj(b) * disc).real >= 0, disc, -disc)
    q = -0.5 * (b + disc)
    safe_a = np.where(a == 0, 1.0, a)
    safe_q = np.where(q == 0, 1.0, q)
    z1 = q / safe_a
    z2 = np.where(q == 0, 0.0, d / safe_q)
    return np.stack([z1, z2], axis=-1)


def _singular_mask(A, a):
    # Hadamard's bound |det A| <= |row 0| |row 1| sets the scale
    scale = np.prod(np.linalg.norm(A, axis=-1), axis=-1)
    return np.abs(a) <= SINGULAR_RTOL * np.where(scale > 0, scale, 1.0)


def amplification_eigs(sym: FourierSymbol) -> Tuple[complex, complex]:
    """The two amplification factors of one symbol."""
    a, b, d = _quadratic(sym.A, sym.B)
    if _singular_mask(sym.A, a):
        raise SingularSymbolError(f"det A vanishes at beta={sym.beta}")
    z1, z2 = _quadratic_roots(a, b, d)
    return complex(z1), complex(z2)


def eigenvalues(weights: SchemeWeights, betas=DEFAULT_BETAS) -> np.ndarray:
    """Amplification factors over ``betas``, shape ``(n, 2)``; ``inf`` where ``A`` is singular."""
    A, B = symbol_matrices(weights, betas)
    a, b, d = _quadratic(A, B)
    z = _quadratic_roots(a, b, d)
    z[_singular_mask(A, a)] = np.inf
    return z


# ---------------------------------------------------------------------------
# Schur-Cohn


def closed_form_3d(c: float, betas) -> np.ndarray:
    """Stored reference closed form of the nonzero 3D amplification factor."""
    beta = np.asarray(betas, dtype=float)
    cb, sb = np.cos(beta), np.sin(beta)
    return -(2 + cb - 1j * c * sb) / (2 - c * c + cb + c * c * cb + 2j * c * sb)


def _schur_strictly_inside(coeffs: np.ndarray) -> bool:
    """All roots in the open unit disk (coefficients highest degree first)."""
    p = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    while p.size > 1:
        lead, const = p[0], p[-1]
        gamma = abs(lead) ** 2 - abs(const) ** 2
        if gamma <= 1e-14 * abs(lead) ** 2:
            return False
        reversed_conj = np.conj(p[::-1])
        reduced = np.conj(lead) * p - const * reversed_conj
        p = reduced[:-1]  # constant term cancels; divide by z
    return True


def schur_unit_disk(coeffs: Sequence[complex], strict_tol: float = 1e-10) -> Dict[str, bool]:
    """Locate the roots of a polynomial relative to the unit circle without computing them.

    ``inside`` means every root satisfies ``|z| < 1 - strict_tol``; ``marginal``
    means none lies beyond ``1 + strict_tol`` but some lie within ``strict_tol``
    of the circle.
    """
    p = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if p.size == 0:
        raise ValueError("the zero polynomial has no well-defined roots")
    degree = p.size - 1
    powers = np.arange(degree, -1, -1)

    def within(radius: float) -> bool:
        return _schur_strictly_inside(p * radius**powers)

    inside = within(1.0 - strict_tol)
    marginal = (not inside) and within(1.0 + strict_tol)
    return {"inside": inside, "marginal": marginal}


# ---------------------------------------------------------------------------
# classification


def classify(
    weights: SchemeWeights,
    betas=DEFAULT_BETAS,
    tol: float = STABILITY_TOL,
    method: str = "roots",
) -> str:
    """``"stable"``, ``"marginal"`` or ``"unstable"`` at the weights' CFL number.

    ``method="schur"`` runs the Schur-Cohn test per sample instead of
    computing roots; it is slower and used to cross-check.
    """
    betas = np.asarray(betas, dtype=float)
    A, B = symbol_matrices(weights, betas)
    a, b, d = _quadratic(A, B)
    singular = _singular_mask(A, a)
    if np.any(singular):
        raise SingularSymbolError(
            f"scheme {scheme_name(weights.mask)} at c={weights.c:.17g}: det A vanishes at "
            f"beta={betas[singular][0]:.6g}"
        )
    if method == "roots":
        zmax = np.abs(_quadratic_roots(a, b, d)).max(axis=1)
        if not np.all(zmax <= 1 + tol):
            return "unstable"
        near = np.abs(zmax - 1) <= tol
    elif method == "schur":
        near = np.zeros(betas.size, dtype=bool)
        for k in range(betas.size):
            res = schur_unit_disk([a[k], b[k], d[k]], tol)
            if not (res["inside"] or res["marginal"]):
                return "unstable"
            near[k] = res["marginal"]
    else:
        raise ValueError(f"unknown method {method!r}")
    return "marginal" if near.mean() > MARGINAL_FRACTION else "stable"


def verdict(scheme, c: float, betas=DEFAULT_BETAS, tol: float = STABILITY_TOL) -> str:
    """Like :func:`classify` but takes a scheme and returns ``"singular"`` where the
    interpolation problem or the symbol ``A`` is singular."""
    try:
        return classify(build_weights(resolve_scheme(scheme), c), betas, tol)
    except (SingularCflError, SingularSymbolError):
        return "singular"


@dataclass
class StabilityReport:
    scheme: str
    mask: StencilMask
    cfls: np.ndarray
    verdicts: List[str]
    c_min: Optional[float]
    windows: List[Tuple[float, float]]
    marginal: bool

    @property
    def has_threshold(self) -> bool:
        return self.c_min is not None and not self.marginal

    def stable_above(self, k: float) -> bool:
        """Bucket used for the by-order counts: threshold rounded to the nearest integer."""
        return self.has_threshold and round(self.c_min) <= k


def _refine_threshold(mask: StencilMask, lo: float, hi: float, iters: int = 20) -> float:
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        v = verdict(mask, mid)
        if v == "singular":
            mid = np.nextafter(mid, hi)
            v = verdict(mask, mid)
        if v == "unstable":
            lo = mid
        else:
            hi = mid
    return hi


def scan_cmin(scheme, cfls=DEFAULT_CFLS, refine: bool = True) -> StabilityReport:
    """Classify a scheme over a CFL grid and locate its stability threshold."""
    mask = resolve_scheme(scheme)
    cfls = np.asarray(cfls, dtype=float)
    verdicts = [verdict(mask, c) for c in cfls]
    ok = [v in ("stable", "marginal") for v in verdicts]
    regular = [v != "singular" for v in verdicts]

    windows: List[Tuple[float, float]] = []
    start = None
    for k, c in enumerate(cfls):
        if ok[k] and start is None:
            start = c
        if start is not None and (not ok[k] or k == len(cfls) - 1):
            end = c if ok[k] else cfls[k - 1]
            windows.append((float(start), float(end)))
            start = None

    unstable = [k for k, v in enumerate(verdicts) if v == "unstable"]
    last_regular = max((k for k, r in enumerate(regular) if r), default=None)
    if last_regular is None or verdicts[last_regular] == "unstable":
        c_min = None
    elif not unstable:
        c_min = 0.0
    else:
        k = unstable[-1]
        nxt = next(j for j in range(k + 1, len(cfls)) if ok[j])
        c_min = _refine_threshold(mask, cfls[k], cfls[nxt]) if refine else float(cfls[nxt])
    n_regular = sum(regular)
    marginal = n_regular > 0 and sum(v == "marginal" for v in verdicts) > 0.5 * n_regular
    return StabilityReport(scheme_name(mask), mask, cfls, verdicts, c_min, windows, marginal)


def table_counts(reports: Iterable[StabilityReport]) -> Dict[str, int]:
    reports = list(reports)
    finite = [r for r in reports if r.has_threshold]
    return {
        "marginal": sum(r.marginal for r in reports),
        "finite_threshold": len(finite),
        "stable_c_gt_2": sum(r.stable_above(2) for r in finite),
        "stable_c_gt_1": sum(r.stable_above(1) for r in finite),
        "unconditional": sum(int(r.c_min == 0.0) for r in finite),
    }


# ---------------------------------------------------------------------------
# diffusion and dispersion


@dataclass
class DiffusionDispersionCurve:
    c: float
    betas: np.ndarray
    z: np.ndarray  # both eigenvalues, shape (n, 2)
    physical: np.ndarray  # physical branch, shape (n,)
    beta_half: float
    ambiguous: bool = False

    @property
    def diffusion(self) -> np.ndarray:
        return np.abs(self.physical)

    @property
    def dispersion(self) -> np.ndarray:
        phase = np.unwrap(np.angle(self.physical))
        out = np.ones_like(self.betas)
        nz = self.betas > 0
        out[nz] = phase[nz] / (-self.betas[nz] * self.c)
        return out


def physical_branch(z: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Follow the eigenvalue that equals 1 at ``beta = 0`` by continuity."""
    n = z.shape[0]
    out = np.empty(n, dtype=complex)
    ambiguous = False
    prev = 1.0 + 0j
    for k in range(n):
        pair = z[k]
        d = np.abs(pair - prev)
        if abs(pair[0] - pair[1]) < 1e-8 * max(1.0, abs(prev)) and k > 0:
            ambiguous = True
            choice = int(np.argmax(np.abs(pair)))
        else:
            choice = int(np.argmin(d))
        out[k] = pair[choice]
        prev = out[k]
    return out, ambiguous


def half_width(betas: np.ndarray, modulus: np.ndarray, level: float = HALF_WIDTH_LEVEL) -> float:
    below = np.nonzero(modulus < level)[0]
    if below.size == 0:
        return float(np.pi)
    k = below[0]
    if k == 0:
        return float(betas[0])
    b0, b1 = betas[k - 1], betas[k]
    m0, m1 = modulus[k - 1], modulus[k]
    return float(b0 + (m0 - level) * (b1 - b0) / (m0 - m1))


def curves(weights: SchemeWeights, betas=None, level: float = HALF_WIDTH_LEVEL) -> DiffusionDispersionCurve:
    betas = np.linspace(0.0, np.pi, 4097) if betas is None else np.asarray(betas, dtype=float)
    z = eigenvalues(weights, betas)
    phys, ambiguous = physical_branch(z)
    return DiffusionDispersionCurve(weights.c, betas, z, phys, half_width(betas, np.abs(phys), level), ambiguous)


def l_stability_probe(mask: StencilMask, betas=None, cfls=(1e3, 1e6), threshold: float = 1e-2) -> bool:
    """Do all amplification factors vanish as ``c -> inf`` at nonzero frequencies?"""
    betas = DEFAULT_BETAS[1:] if betas is None else np.atleast_1d(np.asarray(betas, dtype=float))
    if np.any(betas == 0):
        raise ValueError("the constant mode (beta = 0) never decays; exclude it")
    peaks = []
    for c in cfls:
        w = build_weights(mask, c, exact=True)
        peaks.append(np.abs(eigenvalues(w, betas)).max())
    return bool(peaks[-1] < threshold and all(b <= a for a, b in zip(peaks, peaks[1:])))


# ---------------------------------------------------------------------------
# matrix analysis


def matrix_stability(weights: SchemeWeights, n_cells: int = 100) -> float:
    """Spectral radius of the periodic one-step map on ``n_cells`` cells."""
    from .solver import assemble

    grid = Grid1D(n_cells, 0.0, 1.0)
    system = assemble(weights, grid, speed=1.0, periodic=True)
    try:
        M = system.one_step_matrix()
    except NumericalError:
        return float("inf")
    if not np.all(np.isfinite(M)):
        return float("inf")
    return float(np.abs(np.linalg.eigvals(M)).max())


MATRIX_TOL = 1e-8


def matrix_verdict(weights: SchemeWeights, n_cells: int = 100, tol: float = MATRIX_TOL) -> str:
    return "stable" if matrix_stability(weights, n_cells) <= 1 + tol else "unstable"
