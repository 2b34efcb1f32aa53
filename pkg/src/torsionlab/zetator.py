"""Zeta regularization near s = 0 and analytic-torsion assembly.

The Mellin transform of a heat trace splits at a point T0 (default 1):

* on (0, T0) the fitted expansion integrates in closed form, term by term
  (t^a -> T0^{s+a}/(s+a), with an extra -1/(s+a)^2 for log terms); the
  remainder trace-minus-model is integrated numerically on the sampled
  range, with the piece below the first sample bounded, not guessed;
* on (T0, inf) the trace decays exponentially and is integrated by
  adaptive quadrature of the eigenvalue sum when the samples carry their
  spectrum, or from the samples plus a closed-form tail bound driven by
  the smallest positive eigenvalue otherwise.

Dividing by Gamma(s) then happens analytically: with G = Gamma * zeta
holding Laurent data (a_-2, a_-1, a_0) at s = 0 and 1/Gamma(s) =
s + g1 s^2 + g2 s^3 + ..., one reads off

    zeta(0)  = a_-1 + g1 a_-2,
    zeta'(0) = a_0 + g1 a_-1 + g2 a_-2,
    Res_{s=0} zeta = a_-2,

so no numerical differentiation in s ever enters.  Both conventions for
zeta(0) (with and without the kernel-dimension subtraction) are reported.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.special import exp1
from scipy.special import gamma as gamma_fn

from .conekernel import FittedExpansion, TraceSamples
from .errors import DecayRateUnknown, FitResidualTooLarge
from .fiber import kunneth_betti

EULER_GAMMA = 0.57721566490153286
# 1/Gamma(s) = s + g1 s^2 + g2 s^3 + O(s^4)
G1 = EULER_GAMMA
G2 = EULER_GAMMA ** 2 / 2.0 - math.pi ** 2 / 12.0

FIT_RESIDUAL_LIMIT = 1e-5


@dataclass(frozen=True)
class ZetaData:
    """Zeta-function data of one form degree near s = 0."""

    degree: int
    poles: tuple[tuple[Fraction, int, float], ...]
    zeta0: float
    zeta0_minus_kernel: float
    zeta_prime0: float
    kernel_dim: int
    residue_at_zero: float
    diagnostics: dict = field(compare=False)

    @property
    def error_bound(self) -> float:
        return self.diagnostics["total_bound"]

    def to_json_dict(self) -> dict:
        return {
            "degree": self.degree,
            "poles": [{"s": str(loc), "order": order, "coeff": c}
                      for loc, order, c in self.poles],
            "zeta0": self.zeta0,
            "zeta0_minus_kernel": self.zeta0_minus_kernel,
            "zeta_prime0": self.zeta_prime0,
            "kernel_dim": self.kernel_dim,
            "residue_at_zero": self.residue_at_zero,
            "diagnostics": self.diagnostics,
        }


def _fit_terms_with_kernel(fit: FittedExpansion, kernel_dim: int) -> dict[tuple[Fraction, bool], float]:
    """Fitted coefficients with the kernel projector folded into t^0."""
    terms = dict(fit.coefficients)
    if kernel_dim:
        key = (Fraction(0), False)
        terms[key] = terms.get(key, 0.0) - kernel_dim
    return terms


def _analytic_laurent(terms: dict[tuple[Fraction, bool], float], t0: float) -> tuple[float, float, float]:
    """(a_-2, a_-1, a_0) at s = 0 of sum_j int_0^T0 t^{s-1} (fitted terms)."""
    log_t0 = math.log(t0)
    a_m2 = a_m1 = a_0 = 0.0
    for (alpha, is_log), c in terms.items():
        a = float(alpha)
        if not is_log:
            if alpha == 0:
                a_m1 += c
                a_0 += c * log_t0
            else:
                a_0 += c * t0 ** a / a
        else:
            if alpha == 0:
                a_m2 -= c
                a_0 += c * log_t0 ** 2 / 2.0
            else:
                a_0 += c * t0 ** a * (log_t0 / a - 1.0 / (a * a))
    return a_m2, a_m1, a_0


def _spline_integral(u: np.ndarray, y: np.ndarray, u_lo: float, u_hi: float) -> tuple[float, float]:
    """Integral of the sampled function over [u_lo, u_hi] inside the grid,
    with a grid-halving error estimate."""
    full = CubicSpline(u, y).integrate(u_lo, u_hi)
    if len(u) >= 5:
        coarse = CubicSpline(u[::2], y[::2]).integrate(u_lo, u_hi)
        err = abs(full - coarse) / 15.0 + 1e-16 * abs(full)
    else:
        err = abs(full)
    return float(full), float(err)


def _remainder_integral(samples: TraceSamples, fit: FittedExpansion,
                        t0: float) -> tuple[float, float]:
    """int_0^T0 (trace - fitted model) dt/t from the samples.

    Below the first sample the remainder is bounded by twice its value
    there (it decays at least like sqrt(t) relative to the local scale);
    the bound goes into the error budget, never into the value.
    """
    t = samples.grid
    resid = samples.values - fit.model(t)
    u = np.log(t)
    val, err = _spline_integral(u, resid, float(u[0]), math.log(t0))
    below = 2.0 * abs(resid[0])
    tail_cert = float(np.max(samples.tail_bound)) * (math.log(t0) - u[0])
    return val, err + below + tail_cert


def _large_t_integral(samples: TraceSamples, kernel_dim: int, t0: float,
                      lambda_min: float | None) -> tuple[float, float]:
    """int_T0^inf t^{-1} (trace - kernel_dim) dt with certified error."""
    if samples.eigenvalues is not None:
        zero_w = samples.zero_mode_weight()
        if abs(zero_w - kernel_dim) > 1e-9:
            raise DecayRateUnknown(
                f"zero-mode weight {zero_w} does not match kernel_dim {kernel_dim}")
        lams = np.array([l for l, w in samples.eigenvalues if l > 1e-14])
        ws = np.array([w for l, w in samples.eigenvalues if l > 1e-14])
        val = float(np.dot(ws, exp1(lams * t0)))
        bound = float(np.max(samples.tail_bound)) if len(samples.tail_bound) else 0.0
        return val, bound
    if lambda_min is None:
        raise DecayRateUnknown("no eigenvalue data and no lambda_min supplied")
    if np.count_nonzero(samples.grid >= t0) < 5:
        raise DecayRateUnknown("too few samples beyond the split point")
    t = samples.grid
    y = samples.values - kernel_dim
    val, err = _spline_integral(np.log(t), y, math.log(t0), float(np.log(t[-1])))
    t_last = float(t[-1])
    tail = abs(y[-1]) / (lambda_min * t_last)
    return val, err + tail


def zeta_near_zero(samples: TraceSamples, fit: FittedExpansion, kernel_dim: int,
                   split: float = 1.0, lambda_min: float | None = None,
                   degree: int = 0) -> ZetaData:
    """Zeta invariants at s = 0 from trace samples and a fitted expansion."""
    if fit.residual >= FIT_RESIDUAL_LIMIT:
        raise FitResidualTooLarge(
            f"fit residual {fit.residual:.3g} >= {FIT_RESIDUAL_LIMIT}")
    if samples.grid[-1] < split:
        raise ValueError(f"samples must reach the split point {split}")
    if lambda_min is None:
        lambda_min = samples.positive_lambda_min()

    terms = _fit_terms_with_kernel(fit, kernel_dim)
    a_m2, a_m1, a_0f = _analytic_laurent(terms, split)
    rem, rem_bound = _remainder_integral(samples, fit, split)
    large, large_bound = _large_t_integral(samples, kernel_dim, split, lambda_min)
    a_0 = a_0f + rem + large

    zeta0 = a_m1 + G1 * a_m2
    zeta_prime0 = a_0 + G1 * a_m1 + G2 * a_m2

    # coefficient-level uncertainty: c0 and d0 enter the Laurent data
    # directly; everything else weighs in through the analytic a_0 factors
    b_c0 = fit.coefficient_bound(0, False)
    b_d0 = fit.coefficient_bound(0, True)
    log_t0 = math.log(split)
    a0_sens = 0.0
    for (alpha, is_log) in fit.coefficients:
        b = fit.coefficient_bound(alpha, is_log)
        a = float(alpha)
        if not is_log:
            a0_sens += b * (abs(log_t0) if alpha == 0 else abs(split ** a / a))
        else:
            a0_sens += b * (log_t0 ** 2 / 2 if alpha == 0
                            else abs(split ** a * (log_t0 / a - 1.0 / (a * a))))
    zeta0_bound = b_c0 + G1 * b_d0 + rem_bound
    zeta_prime0_bound = rem_bound + large_bound + a0_sens + G1 * b_c0 + abs(G2) * b_d0
    residue_bound = b_d0 + rem_bound
    total_bound = max(zeta0_bound, zeta_prime0_bound)

    # one pole per location: a log term upgrades the order to 2, and the
    # reported number is then the leading (double-pole) coefficient
    by_loc: dict[Fraction, tuple[int, float]] = {}
    for (alpha, is_log), c in sorted(terms.items()):
        loc = -alpha
        if is_log:
            by_loc[loc] = (2, -c)
        elif loc not in by_loc:
            by_loc[loc] = (1, c)
    poles = [(loc, order, c) for loc, (order, c) in sorted(by_loc.items())]
    return ZetaData(
        degree=degree,
        poles=tuple(poles),
        zeta0=zeta0 + kernel_dim,          # plain t^0-coefficient convention
        zeta0_minus_kernel=zeta0,
        zeta_prime0=zeta_prime0,
        kernel_dim=kernel_dim,
        residue_at_zero=a_m2,
        diagnostics={
            "split": split,
            "remainder_integral": rem,
            "remainder_bound": rem_bound,
            "large_t_integral": large,
            "large_t_bound": large_bound,
            "fit_residual": fit.residual,
            "fit_condition": fit.condition,
            "zeta0_bound": zeta0_bound,
            "zeta_prime0_bound": zeta_prime0_bound,
            "residue_bound": residue_bound,
            "total_bound": total_bound,
        },
    )


# -------------------------------------------------- complex-s evaluation --

def gamma_weighted_zeta(samples: TraceSamples, fit: FittedExpansion,
                        kernel_dim: int, s: complex, split: float = 1.0) -> complex:
    """Gamma(s) * zeta(s) at a complex point away from the exact poles.

    Accuracy is set by the fit window and the remainder quadrature; the
    precise instrument for Laurent data at the predicted poles is the
    analytic part, which this function evaluates exactly.
    """
    if samples.grid[-1] < split:
        raise ValueError(f"samples must reach the split point {split}")
    terms = _fit_terms_with_kernel(fit, kernel_dim)
    t0 = split
    log_t0 = math.log(t0)
    total = 0j
    for (alpha, is_log), c in terms.items():
        a = float(alpha)
        pole = s + a
        scale = cmath.exp(pole * log_t0)
        if is_log:
            total += c * scale * (log_t0 / pole - 1.0 / (pole * pole))
        else:
            total += c * scale / pole
    t = samples.grid
    resid = samples.values - fit.model(t)
    u = np.log(t)
    total += complex(CubicSpline(u, resid * np.exp(s.real * u)
                                 * np.exp(1j * s.imag * u)).integrate(u[0], math.log(t0)))
    if samples.eigenvalues is None:
        raise DecayRateUnknown("complex evaluation requires eigenvalue data")
    lams = np.array([l for l, w in samples.eigenvalues if l > 1e-14])
    ws = np.array([w for l, w in samples.eigenvalues if l > 1e-14])

    def trace_minus_kernel(tt: float) -> float:
        return float(np.dot(ws, np.exp(-tt * lams)))

    re = quad(lambda tt: (trace_minus_kernel(tt) * tt ** (s.real - 1.0)
                          * math.cos(s.imag * math.log(tt))), t0, np.inf,
              epsabs=1e-13, limit=200)[0]
    im = quad(lambda tt: (trace_minus_kernel(tt) * tt ** (s.real - 1.0)
                          * math.sin(s.imag * math.log(tt))), t0, np.inf,
              epsabs=1e-13, limit=200)[0]
    return total + complex(re, im)


def zeta_contour_residue(samples: TraceSamples, fit: FittedExpansion,
                         kernel_dim: int, center: complex = 0j,
                         radius: float = 0.05, nodes: int = 16,
                         split: float = 1.0) -> complex:
    """Contour estimate of the residue of zeta(s) itself at `center`."""
    acc = 0j
    for j in range(nodes):
        s = center + radius * cmath.exp(2j * math.pi * j / nodes)
        g = gamma_weighted_zeta(samples, fit, kernel_dim, s, split)
        acc += g / gamma_fn(s) * (s - center)
    return acc / nodes


def gamma_zeta_laurent_coefficient(samples: TraceSamples, fit: FittedExpansion,
                                   kernel_dim: int, s0: complex, order: int,
                                   radius: float = 0.05, nodes: int = 32,
                                   split: float = 1.0) -> complex:
    """Laurent coefficient of (s-s0)^(-order) of Gamma*zeta via a contour."""
    acc = 0j
    for j in range(nodes):
        s = s0 + radius * cmath.exp(2j * math.pi * j / nodes)
        g = gamma_weighted_zeta(samples, fit, kernel_dim, s, split)
        acc += g * (s - s0) ** order
    return acc / nodes


# ------------------------------------------------------- model descriptors --

@dataclass(frozen=True)
class ModelDescriptor:
    """What space a pipeline run describes, for kernel bookkeeping.

    kind "cone": truncated cone with Dirichlet condition at x = 1 over a
    fiber of dimension `fiber_dim`; kind "circle"/"torus": a closed flat
    factor; kind "product": a product of descriptors.
    """

    kind: str
    fiber_dim: int = 0
    periods: tuple[float, ...] = ()
    parts: tuple["ModelDescriptor", ...] = ()

    def dimension(self) -> int:
        if self.kind == "cone":
            return self.fiber_dim + 1
        if self.kind == "circle":
            return 1
        if self.kind == "torus":
            return len(self.periods)
        if self.kind == "product":
            return sum(p.dimension() for p in self.parts)
        raise ValueError(f"unknown model kind {self.kind!r}")


def kernel_dimension(model: ModelDescriptor) -> list[int]:
    """Kernel dimension of the model Laplacian per form degree.

    The Dirichlet condition at the truncated-cone boundary rules out zero
    modes in every degree (the first Bessel zero is strictly positive), so
    cones contribute nothing and products reduce to the closed factors'
    Betti numbers.
    """
    if model.kind == "cone":
        return [0] * (model.dimension() + 1)
    if model.kind == "circle":
        return [1, 1]
    if model.kind == "torus":
        f = len(model.periods)
        return [math.comb(f, k) for k in range(f + 1)]
    if model.kind == "product":
        parts = [kernel_dimension(p) for p in model.parts]
        if any(model_part.kind == "cone" for model_part in model.parts):
            return [0] * (model.dimension() + 1)
        return kunneth_betti(parts)
    raise ValueError(f"unknown model kind {model.kind!r}")


# ----------------------------------------------------------- torsion report --

@dataclass(frozen=True)
class TorsionReport:
    per_degree: tuple[ZetaData, ...]
    log_torsion: float
    torsion_zeta_regular: bool
    all_degrees_regular: bool
    residues_cancel: bool
    torsion_residue: float
    model: str
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "log_torsion": self.log_torsion,
            "torsion_zeta_regular": self.torsion_zeta_regular,
            "all_degrees_regular": self.all_degrees_regular,
            "residues_cancel": self.residues_cancel,
            "torsion_residue": self.torsion_residue,
            "diagnostics": self.diagnostics,
            "per_degree": [z.to_json_dict() for z in self.per_degree],
        }

    def to_csv(self) -> str:
        lines = ["degree,zeta0,zeta0_minus_kernel,zeta_prime0,kernel_dim,error_bound"]
        for z in self.per_degree:
            lines.append(f"{z.degree},{z.zeta0:.17g},{z.zeta0_minus_kernel:.17g},"
                         f"{z.zeta_prime0:.17g},{z.kernel_dim},{z.error_bound:.17g}")
        return "\n".join(lines) + "\n"


def torsion_assemble(per_degree: Sequence[ZetaData], model: str = "",
                     diagnostics: dict | None = None) -> TorsionReport:
    """Weighted alternating assembly of per-degree zeta data.

    log T = (1/2) sum_k (-1)^k k zeta_k'(0).  Regularity of the torsion
    zeta function holds when every degree is regular at 0, or when the
    per-degree residues cancel in the same weighted alternating sum; both
    facts are reported separately.
    """
    degrees = [z.degree for z in per_degree]
    if degrees != list(range(len(per_degree))):
        raise ValueError(f"need contiguous degrees 0..m, got {degrees}")
    log_t = 0.5 * sum((-1) ** z.degree * z.degree * z.zeta_prime0 for z in per_degree)
    res = 0.5 * sum((-1) ** z.degree * z.degree * z.residue_at_zero for z in per_degree)

    def res_bound(z: ZetaData) -> float:
        return max(z.diagnostics.get("residue_bound", z.error_bound), 1e-10)

    bound = sum(res_bound(z) for z in per_degree)
    all_regular = all(abs(z.residue_at_zero) <= res_bound(z) for z in per_degree)
    cancel = abs(res) <= bound
    return TorsionReport(
        per_degree=tuple(per_degree),
        log_torsion=log_t,
        torsion_zeta_regular=all_regular or cancel,
        all_degrees_regular=all_regular,
        residues_cancel=cancel,
        torsion_residue=res,
        model=model,
        diagnostics=diagnostics or {},
    )
