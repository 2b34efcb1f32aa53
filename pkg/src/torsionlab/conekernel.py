"""Model heat kernel, certified heat traces, and expansion-coefficient fits.

The exactly solvable radial problem has the Friedrichs heat kernel

    (1/2t) (x xt)^(1/2) I_nu(x xt / 2t) exp(-(x^2 + xt^2)/4t),

computed here in the scaled-Bessel form so nothing overflows at small t.
Truncating the cone at x = 1 with a Dirichlet condition turns each Bessel
order nu into the eigenvalue family j_{nu,k}^2, and the heat trace becomes
a plain double sum over (nu, k).  Every trace sample carries a certified
tail bound obtained from a Weyl envelope N(s) <= C s^q with C read off the
computed spectrum.

Least-squares extraction of expansion coefficients works in the basis
{t^a, t^a log t} dictated by an ExpansionTemplate, with rows weighted by
t^(-a_min) so the leading term carries comparable influence across the
sample range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammaincc

from .bessel import bessel_i, bessel_j_zeros
from .errors import (
    IllConditioned,
    InsufficientSamples,
    MismatchedGrids,
    TailNotCertified,
)
from .fiber import FiberSpectrum, NuSpectrum
from .phg import ExpansionTemplate

TAIL_RELATIVE_LIMIT = 1e-10
PRECHECK_RELATIVE_LIMIT = 1e-14
CONDITION_LIMIT = 1e12
MAX_PRODUCT_EIGENVALUES = 2_000_000


def cone_heat_kernel(nu: float, t: float, x: float, xt: float) -> float:
    """Friedrichs heat kernel of the radial model operator on the half line.

    Evaluated as (1/2t) sqrt(x xt) [e^{-z} I_nu(z)] e^{-(x-xt)^2/4t} with
    z = x xt / 2t, which is the same value with all exponentials paired so
    neither factor overflows.
    """
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if t <= 0 or x <= 0 or xt <= 0:
        raise ValueError("t, x, xt must be positive")
    z = x * xt / (2.0 * t)
    gauss = math.exp(-((x - xt) ** 2) / (4.0 * t))
    return 0.5 / t * math.sqrt(x * xt) * bessel_i(nu, z, scaled=True) * gauss


@dataclass(frozen=True)
class ConeSpectrum:
    """Dirichlet eigenvalues j_{nu,k}^2 <= lambda_cutoff of a truncated cone."""

    nu_spectrum: NuSpectrum
    zeros: dict[float, list[float]]
    multiplicities: dict[float, int]
    lambda_cutoff: float
    cone_dim: int

    def eigenvalue_pairs(self) -> list[tuple[float, int]]:
        """(lambda^2, multiplicity) ascending."""
        pairs = []
        for nu, zs in self.zeros.items():
            w = self.multiplicities[nu]
            pairs.extend((z * z, w) for z in zs)
        pairs.sort()
        return pairs


@lru_cache(maxsize=8192)
def _cached_zeros(nu: float, z_max: float) -> tuple[float, ...]:
    # form degrees of one model share most Bessel orders
    return tuple(bessel_j_zeros(nu, z_max))


def cone_spectrum(nu_spec: NuSpectrum, lambda_cutoff: float, cone_dim: int = 2) -> ConeSpectrum:
    """Enumerate all truncated-cone eigenvalues up to lambda_cutoff.

    Modes sharing the same Bessel order (to 1e-12) are merged so each order
    is root-searched once.
    """
    if lambda_cutoff <= 0:
        raise ValueError("lambda_cutoff must be positive")
    mult: dict[float, int] = {}
    for mode in nu_spec.modes:
        key = round(mode.nu, 12)
        mult[key] = mult.get(key, 0) + mode.multiplicity
    z_max = math.sqrt(lambda_cutoff)
    zeros = {nu: list(_cached_zeros(nu, z_max)) for nu in sorted(mult)}
    for nu, zs in zeros.items():
        if zs and zs[0] <= nu:
            raise RuntimeError(f"first zero {zs[0]} not above its order {nu}")
    return ConeSpectrum(nu_spec, zeros, mult, lambda_cutoff, cone_dim)


@dataclass(frozen=True)
class TraceSamples:
    """Heat-trace values on a time grid with certified truncation error."""

    grid: np.ndarray
    values: np.ndarray
    tail_bound: np.ndarray
    eigenvalues: tuple[tuple[float, float], ...] | None = None
    label: str = ""

    def positive_lambda_min(self) -> float | None:
        if self.eigenvalues is None:
            return None
        pos = [lam for lam, w in self.eigenvalues if lam > 1e-14 and w != 0]
        return min(pos) if pos else None

    def zero_mode_weight(self) -> float:
        if self.eigenvalues is None:
            return 0.0
        return sum(w for lam, w in self.eigenvalues if lam <= 1e-14)

    def restrict(self, t_min: float = 0.0, t_max: float = math.inf) -> "TraceSamples":
        keep = (self.grid >= t_min) & (self.grid <= t_max)
        return TraceSamples(self.grid[keep], self.values[keep],
                            self.tail_bound[keep], self.eigenvalues, self.label)

    def to_csv(self) -> str:
        lines = ["t,value,tail_bound"]
        for t, v, b in zip(self.grid, self.values, self.tail_bound):
            lines.append(f"{t:.17g},{v:.17g},{b:.17g}")
        return "\n".join(lines) + "\n"


def log_grid(t_min: float, t_max: float, points: int) -> np.ndarray:
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    return np.geomspace(t_min, t_max, points)


def _certified_trace(pairs: Sequence[tuple[float, float]], q: float, lam_cut: float,
                     t_grid: np.ndarray, label: str) -> TraceSamples:
    """Sum w exp(-t lambda) with a Weyl-envelope tail bound.

    The envelope constant is 2x the largest observed N(s)/s^q over the
    computed spectrum; the factor-of-two safety margin covers the
    extrapolation beyond the cutoff that the Weyl law justifies.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0 or np.any(t_grid <= 0):
        raise ValueError("t grid must be positive")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t grid must be strictly increasing")
    lams = np.array([p[0] for p in pairs])
    ws = np.array([p[1] for p in pairs])
    order = np.argsort(lams, kind="stable")
    lams, ws = lams[order], ws[order]

    positive = lams > 1e-14
    if np.any(positive):
        counts = np.cumsum(ws)[positive]
        envelope = 2.0 * float(np.max(counts / lams[positive] ** q))
    else:
        envelope = 0.0

    values = np.array([math.fsum(ws * np.exp(-t * lams)) for t in t_grid])
    # tail <= t C int_Lambda^inf s^q e^{-ts} ds = C t^{-q} Gamma(q+1, t Lambda)
    tail = envelope * math.gamma(q + 1.0) * t_grid ** (-q) \
        * gammaincc(q + 1.0, t_grid * lam_cut)

    precheck = np.exp(-t_grid * lam_cut)
    bad = precheck >= PRECHECK_RELATIVE_LIMIT * np.abs(values)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise TailNotCertified(
            f"exp(-t*Lambda) = {precheck[i]:.3g} at t={t_grid[i]:.3g} is not below "
            f"{PRECHECK_RELATIVE_LIMIT} x trace ({values[i]:.6g}); raise lambda_cutoff")
    bad = tail >= TAIL_RELATIVE_LIMIT * np.abs(values)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise TailNotCertified(
            f"tail bound {tail[i]:.3g} at t={t_grid[i]:.3g} exceeds "
            f"{TAIL_RELATIVE_LIMIT} x trace ({values[i]:.6g}); raise lambda_cutoff")
    return TraceSamples(t_grid, values, tail, tuple((float(l), float(w))
                        for l, w in zip(lams, ws)), label)


def truncated_cone_trace(spec: ConeSpectrum, p: int, t_grid: Sequence[float]) -> TraceSamples:
    """Heat trace of the Dirichlet-truncated cone in form degree p."""
    degrees = {m.cone_degree for m in spec.nu_spectrum.modes}
    if degrees and degrees != {p}:
        raise ValueError(f"spectrum holds degrees {sorted(degrees)}, asked for {p}")
    pairs = spec.eigenvalue_pairs()
    if not pairs:
        grid = np.asarray(t_grid, dtype=float)
        return TraceSamples(grid, np.zeros_like(grid), np.zeros_like(grid), (), f"cone-p{p}")
    return _certified_trace(pairs, q=spec.cone_dim / 2.0, lam_cut=spec.lambda_cutoff,
                            t_grid=np.asarray(t_grid, dtype=float), label=f"cone-p{p}")


def fiber_factor_trace(fiber: FiberSpectrum, degree: int,
                       t_grid: Sequence[float]) -> TraceSamples:
    """Heat trace of a closed flat factor (circle or torus) in one degree."""
    pairs = [(e.mu2, float(e.mult)) for e in fiber.degree_entries(degree)]
    if not pairs:
        raise ValueError(f"no entries in degree {degree}")
    q = max(fiber.dim_f / 2.0, 0.5)
    return _certified_trace(pairs, q=q, lam_cut=fiber.cutoff ** 2,
                            t_grid=np.asarray(t_grid, dtype=float),
                            label=f"factor-deg{degree}")


def product_trace(factor_traces: Sequence[Mapping[int, TraceSamples]]) -> dict[int, TraceSamples]:
    """Kunneth assembly: Tr_k(A x B) = sum_{i+j=k} Tr_i(A) Tr_j(B).

    Tail bounds propagate through the product rule; eigenvalue provenance
    is combined as pairwise sums while that stays below a size cap.
    """
    if not factor_traces:
        raise ValueError("need at least one factor")
    result = dict(factor_traces[0])
    for other in factor_traces[1:]:
        result = _product_two(result, other)
    return result


def _product_two(a: Mapping[int, TraceSamples], b: Mapping[int, TraceSamples]) -> dict[int, TraceSamples]:
    grids = [s.grid for s in a.values()] + [s.grid for s in b.values()]
    for g in grids[1:]:
        if g.shape != grids[0].shape or not np.array_equal(g, grids[0]):
            raise MismatchedGrids("factor traces must share one t grid")
    grid = grids[0]
    out: dict[int, TraceSamples] = {}
    for k in range(max(a) + max(b) + 1):
        val = np.zeros_like(grid)
        tail = np.zeros_like(grid)
        lam_chunks: list[np.ndarray] | None = []
        w_chunks: list[np.ndarray] = []
        for i in range(k + 1):
            j = k - i
            if i not in a or j not in b:
                continue
            sa, sb = a[i], b[j]
            val += sa.values * sb.values
            tail += (np.abs(sa.values) * sb.tail_bound
                     + np.abs(sb.values) * sa.tail_bound
                     + sa.tail_bound * sb.tail_bound)
            if lam_chunks is not None and sa.eigenvalues is not None \
                    and sb.eigenvalues is not None \
                    and len(sa.eigenvalues) * len(sb.eigenvalues) <= MAX_PRODUCT_EIGENVALUES:
                la = np.array([p[0] for p in sa.eigenvalues])
                wa = np.array([p[1] for p in sa.eigenvalues])
                lb = np.array([p[0] for p in sb.eigenvalues])
                wb = np.array([p[1] for p in sb.eigenvalues])
                lam_chunks.append((la[:, None] + lb[None, :]).ravel())
                w_chunks.append((wa[:, None] * wb[None, :]).ravel())
            else:
                lam_chunks = None
        pairs = None
        if lam_chunks is not None and lam_chunks:
            lam = np.round(np.concatenate(lam_chunks), 12)
            w = np.concatenate(w_chunks)
            uniq, inverse = np.unique(lam, return_inverse=True)
            sums = np.bincount(inverse, weights=w)
            pairs = tuple((float(l), float(s)) for l, s in zip(uniq, sums))
        elif lam_chunks is not None:
            pairs = ()
        out[k] = TraceSamples(grid, val, tail, pairs, f"product-deg{k}")
    return out


@dataclass(frozen=True)
class FittedExpansion:
    """Template basis coefficients with fit diagnostics.

    `coefficient_bounds` are worst-case sensitivities: the largest shift of
    each coefficient consistent with the observed weighted residuals (L1
    norm of the pseudoinverse row times the residual sup).  They dominate
    collinearity noise when the template carries log columns the data does
    not actually need.
    """

    template: ExpansionTemplate
    coefficients: dict[tuple[Fraction, bool], float]
    residual: float
    condition: float
    coefficient_bounds: dict[tuple[Fraction, bool], float]

    def coefficient(self, exponent, log: bool = False) -> float:
        return self.coefficients.get((Fraction(exponent), log), 0.0)

    def coefficient_bound(self, exponent, log: bool = False) -> float:
        return self.coefficient_bounds.get((Fraction(exponent), log), 0.0)

    def model(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for (alpha, is_log), c in self.coefficients.items():
            col = t ** float(alpha)
            if is_log:
                col = col * np.log(t)
            out += c * col
        return out

    def to_json_dict(self) -> dict:
        return {
            "template": self.template.to_json_dict(),
            "coefficients": [
                {"exp": str(alpha), "log": is_log, "coeff": c,
                 "bound": self.coefficient_bounds[(alpha, is_log)]}
                for (alpha, is_log), c in sorted(self.coefficients.items())
            ],
            "residual": self.residual,
            "condition": self.condition,
        }


def _solve_weighted(t: np.ndarray, values: np.ndarray,
                    basis: list[tuple[Fraction, bool]]):
    alpha_min = float(min(a for a, _ in basis))
    w = t ** (-alpha_min)
    cols = []
    for alpha, is_log in basis:
        col = t ** float(alpha)
        if is_log:
            col = col * np.log(t)
        cols.append(w * col)
    design = np.column_stack(cols)
    rhs = w * values
    coeff, _, _, sing = np.linalg.lstsq(design, rhs, rcond=None)
    condition = float(sing[0] / sing[-1]) if sing[-1] > 0 else math.inf
    weighted_resid = design @ coeff - rhs
    rel_resid = np.abs(weighted_resid / w) / np.abs(values)
    # worst coefficient shift explained by residuals of the observed size
    resid_sup = float(np.max(np.abs(weighted_resid)))
    sens = np.abs(np.linalg.pinv(design)).sum(axis=1) * resid_sup
    return coeff, condition, rel_resid, sens


def fit_expansion(samples: TraceSamples, template: ExpansionTemplate,
                  trim_edge: bool = True) -> FittedExpansion:
    """Weighted least squares of trace samples in the template basis.

    Weights t^(-alpha_min) equalize the influence of the leading term over
    a log-spaced grid.  A truncated template cannot represent the trace all
    the way to the largest times (the omitted content grows with t), so by
    default trailing samples are trimmed one at a time while the last
    relative residual stands out against the median by a factor 10; for
    data the template describes exactly, nothing is trimmed.  Fits whose
    design matrix is effectively singular are refused rather than returned.
    """
    basis: list[tuple[Fraction, bool]] = []
    for term in template.terms:
        basis.append((term.exponent, False))
        if term.haslog:
            basis.append((term.exponent, True))
    if len(samples.grid) < 2 * len(basis):
        raise InsufficientSamples(
            f"{len(samples.grid)} samples for {len(basis)} basis functions; need 2x")
    t = samples.grid
    values = samples.values
    n = len(t)
    while True:
        coeff, condition, rel_resid, sens = _solve_weighted(t[:n], values[:n], basis)
        if not trim_edge or n <= 2 * len(basis):
            break
        floor = max(float(np.median(rel_resid)), 1e-13)
        if rel_resid[-1] > 10.0 * floor:
            n -= 1
            continue
        break
    if condition > CONDITION_LIMIT:
        raise IllConditioned(f"fit condition estimate {condition:.3g} exceeds {CONDITION_LIMIT:.0e}")
    return FittedExpansion(
        template=template,
        coefficients={key: float(c) for key, c in zip(basis, coeff)},
        residual=float(np.max(rel_resid)),
        condition=condition,
        coefficient_bounds={key: float(s) for key, s in zip(basis, sens)},
    )


def mckean_singer_defect(per_degree: Sequence[TraceSamples], betti: Sequence[int]) -> float:
    """Sup over the grid of |sum_k (-1)^k (Tr_k(t) - beta_k)|."""
    if len(per_degree) != len(betti):
        raise ValueError("one Betti number per degree required")
    grid = per_degree[0].grid
    for s in per_degree[1:]:
        if s.grid.shape != grid.shape or not np.array_equal(s.grid, grid):
            raise MismatchedGrids("per-degree traces must share one t grid")
    total = np.zeros_like(grid)
    for k, (s, beta) in enumerate(zip(per_degree, betti)):
        total += (-1.0) ** k * (s.values - beta)
    return float(np.max(np.abs(total)))
