"""Command-line front end: model configuration and pipeline orchestration.

Subcommands:

    structure   symbolic heat-trace template and zeta pole report
    spectrum    fiber and Bessel-order spectra of a configured model
    trace       per-degree heat traces (JSON, or CSV for one degree)
    fit         expansion coefficients fitted against the predicted template
    zeta        per-degree zeta data near s = 0
    torsion     full pipeline: spectrum -> trace -> fit -> zeta -> report
    selftest    oracle suite with one PASS/FAIL line per check

Configuration comes from `--config file` (TOML-style `key = value` lines)
with command-line flags taking precedence.  Exit codes: 0 success, 2
invalid input, 3 I/O failure, 4 numerical certification failure.  All
output is deterministic: floats carry 17 significant digits and dict keys
are sorted, so identical configurations give byte-identical files.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bessel, conekernel, fiber, phg, zetator
from ._serialize import dumps_canonical, write_atomic
from .errors import (
    CertificationError,
    DecayRateUnknown,
    FitResidualTooLarge,
    TorsionLabError,
)

SCHEMA = "torsionlab/1"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

CONVENTION_ALIASES = {
    "paper-literal": "PaperLiteral",
    "geometric-oracle": "GeometricOracle",
    "PaperLiteral": "PaperLiteral",
    "GeometricOracle": "GeometricOracle",
}


# ------------------------------------------------------------- config file --

def _parse_value(text: str):
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        return [_parse_value(v) for v in inner.split(",")] if inner else []
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_file(path: str) -> dict:
    out = {}
    with open(path) as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip()] = _parse_value(value)
    return out


@dataclass
class ModelConfig:
    model: str = "cone"                  # cone | product
    fiber_kind: str = "circle"           # circle | torus
    radius: float = 1.0
    periods: list = field(default_factory=list)
    base: str = "point"                  # point | circle | torus
    base_radius: float = 1.0
    base_periods: list = field(default_factory=list)
    convention: str = "GeometricOracle"
    nu_max: float | None = None
    lambda_max: float | None = None
    t_min: float = 1e-3
    t_max: float = 1e-1
    points: int = 241
    even: bool = True
    single_nu: float | None = None
    # fit basis order: 3 (the symbolic default) makes the m = 2 log basis
    # collide with the conditioning limit, 2 is accurate and well-posed
    template_cutoff: str = "2"
    split: float = 1.0
    output: str | None = None
    format: str = "json"

    @classmethod
    def from_sources(cls, args: argparse.Namespace, file_cfg: dict) -> "ModelConfig":
        cfg = cls()
        for key in vars(cfg):
            flag = getattr(args, key, None)
            if flag is not None:
                setattr(cfg, key, flag)
            elif key in file_cfg:
                setattr(cfg, key, file_cfg[key])
        unknown = set(file_cfg) - set(vars(cfg))
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cfg

    def validate(self) -> None:
        if self.model not in ("cone", "product"):
            raise ValueError(f"model must be cone or product, got {self.model!r}")
        if self.fiber_kind not in ("circle", "torus"):
            raise ValueError(f"fiber must be circle or torus, got {self.fiber_kind!r}")
        if self.base not in ("point", "circle", "torus"):
            raise ValueError(f"base must be point, circle or torus, got {self.base!r}")
        if self.model == "cone" and self.base != "point":
            raise ValueError("cone model takes base = point; use model = product")
        if not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t_min < t_max")
        if self.points < 16:
            raise ValueError("need at least 16 grid points")
        if self.lambda_max is not None and self.lambda_max <= 0:
            raise ValueError("lambda_max must be positive")
        if self.convention not in CONVENTION_ALIASES:
            raise ValueError(f"unknown convention {self.convention!r}")
        self.convention = CONVENTION_ALIASES[self.convention]


# --------------------------------------------------------------- pipeline --

@dataclass
class Pipeline:
    """Lazily evaluated model pipeline shared by the subcommands."""

    cfg: ModelConfig

    def __post_init__(self):
        cfg = self.cfg
        self.lambda_max = cfg.lambda_max if cfg.lambda_max is not None \
            else 36.0 / cfg.t_min
        self.grid = conekernel.log_grid(cfg.t_min, max(cfg.split, cfg.t_max),
                                        cfg.points)
        if cfg.single_nu is not None:
            self.descriptor = zetator.ModelDescriptor("cone", fiber_dim=0)
            self.m = 1
            self.b = 0
            self.degrees = [0]
            return
        if cfg.fiber_kind == "circle":
            self.fiber_periods = (2.0 * math.pi * cfg.radius,)
        else:
            if not cfg.periods:
                raise ValueError("torus fiber needs periods")
            self.fiber_periods = tuple(float(p) for p in cfg.periods)
        f = len(self.fiber_periods)
        cone = zetator.ModelDescriptor("cone", fiber_dim=f)
        if cfg.base == "point":
            self.descriptor = cone
            self.b = 0
        else:
            if cfg.base == "circle":
                self.base_periods = (2.0 * math.pi * cfg.base_radius,)
            else:
                if not cfg.base_periods:
                    raise ValueError("torus base needs base_periods")
                self.base_periods = tuple(float(p) for p in cfg.base_periods)
            base = zetator.ModelDescriptor(cfg.base, periods=self.base_periods)
            self.descriptor = zetator.ModelDescriptor("product", parts=(base, cone))
            self.b = len(self.base_periods)
        self.m = self.descriptor.dimension()
        self.degrees = list(range(self.m + 1))

    # -- stages ---------------------------------------------------------

    def nu_cutoff(self) -> float:
        return math.sqrt(self.lambda_max) + 0.5

    def fiber_spectrum(self) -> fiber.FiberSpectrum:
        if self.cfg.single_nu is not None:
            raise ValueError("single-nu override has no fiber spectrum")
        return fiber.torus_spectrum(self.fiber_periods,
                                    cutoff=self.nu_cutoff() + fiber.A_SPECTRUM_MARGIN)

    def nu_spectra(self) -> dict[int, fiber.NuSpectrum]:
        if self.cfg.single_nu is not None:
            return {0: fiber.single_nu_spectrum(self.cfg.single_nu,
                                                convention=self.cfg.convention)}
        fib = self.fiber_spectrum()
        cone_degs = range(len(self.fiber_periods) + 2)
        return {p: fiber.a_spectrum(fib, p, self.cfg.convention, nu_max=self.nu_cutoff())
                for p in cone_degs}

    def cone_traces(self) -> dict[int, conekernel.TraceSamples]:
        cone_dim = 1 if self.cfg.single_nu is not None else len(self.fiber_periods) + 1
        out = {}
        for p, spec in self.nu_spectra().items():
            cs = conekernel.cone_spectrum(spec, self.lambda_max, cone_dim=cone_dim)
            out[p] = conekernel.truncated_cone_trace(cs, p, self.grid)
        return out

    def traces(self) -> dict[int, conekernel.TraceSamples]:
        cached = getattr(self, "_traces", None)
        if cached is not None:
            return cached
        cone = self.cone_traces()
        if self.cfg.base == "point" or self.cfg.single_nu is not None:
            out = cone
        else:
            base_fiber = fiber.torus_spectrum(self.base_periods, cutoff=self.nu_cutoff())
            base = {d: conekernel.fiber_factor_trace(base_fiber, d, self.grid)
                    for d in range(len(self.base_periods) + 1)}
            out = conekernel.product_trace([base, cone])
        self._traces = out
        return out

    def template(self) -> phg.ExpansionTemplate:
        cutoff = Fraction(1) if self.cfg.single_nu is not None \
            else Fraction(self.cfg.template_cutoff)
        return phg.heat_trace_structure(self.m, self.b, even=self.cfg.even,
                                        boundary=True, cutoff=cutoff)

    def fits(self) -> dict[int, conekernel.FittedExpansion]:
        tpl = self.template()
        return {k: conekernel.fit_expansion(tr.restrict(t_max=self.cfg.t_max), tpl)
                for k, tr in self.traces().items()}

    def zetas(self) -> dict[int, zetator.ZetaData]:
        kernels = zetator.kernel_dimension(self.descriptor)
        tpl = self.template()
        out = {}
        for k, tr in sorted(self.traces().items()):
            fit = conekernel.fit_expansion(tr.restrict(t_max=self.cfg.t_max), tpl)
            out[k] = zetator.zeta_near_zero(tr, fit, kernels[k] if k < len(kernels) else 0,
                                            split=self.cfg.split, degree=k)
        return out

    def torsion(self) -> zetator.TorsionReport:
        traces = self.traces()
        kernels = zetator.kernel_dimension(self.descriptor)
        betti = [kernels[k] if k < len(kernels) else 0 for k in sorted(traces)]
        defect = conekernel.mckean_singer_defect(
            [traces[k] for k in sorted(traces)], betti)
        zetas = self.zetas()
        per_degree = [zetas[k] for k in sorted(zetas)]
        return zetator.torsion_assemble(
            per_degree, model=self.model_label(),
            diagnostics={"mckean_singer_defect": defect,
                         "lambda_max": self.lambda_max,
                         "t_min": self.cfg.t_min,
                         "grid_points": self.cfg.points})

    def model_label(self) -> str:
        cfg = self.cfg
        if cfg.single_nu is not None:
            return f"single-nu({cfg.single_nu})"
        fib = f"circle(r={cfg.radius})" if cfg.fiber_kind == "circle" \
            else f"torus{tuple(cfg.periods)}"
        if cfg.base == "point":
            return f"cone[{fib}]"
        base = f"circle(r={cfg.base_radius})" if cfg.base == "circle" \
            else f"torus{tuple(cfg.base_periods)}"
        return f"{base} x cone[{fib}]"


# ----------------------------------------------------------------- output --

def _emit(payload: dict, cfg_output: str | None) -> None:
    payload = {"schema": SCHEMA, **payload}
    text = dumps_canonical(payload)
    if cfg_output:
        write_atomic(cfg_output, text)
    else:
        sys.stdout.write(text)


def _mode_error(exc: BaseException) -> int:
    if isinstance(exc, (CertificationError, FitResidualTooLarge, DecayRateUnknown)):
        return EXIT_NUMERICAL
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_INVALID


# --------------------------------------------------------------- commands --

def cmd_structure(args: argparse.Namespace) -> int:
    m, b = args.m, args.b
    if m < 1 or b < 0 or b > m - 1:
        raise ValueError(f"b must satisfy b <= m-2 (edge needs a fiber), got m={m}, b={b}")
    tpl = phg.heat_trace_structure(m, b, even=args.even, boundary=args.boundary,
                                   cutoff=Fraction(args.cutoff))
    poles = phg.zeta_pole_structure(tpl)
    _emit({"template": tpl.to_json_dict(), "zeta": poles.to_json_dict()}, args.output)
    return EXIT_OK


def _pipeline(args: argparse.Namespace) -> Pipeline:
    file_cfg = parse_config_file(args.config) if args.config else {}
    cfg = ModelConfig.from_sources(args, file_cfg)
    cfg.validate()
    return Pipeline(cfg)


def cmd_spectrum(args: argparse.Namespace) -> int:
    pipe = _pipeline(args)
    spectra = pipe.nu_spectra()
    _emit({"model": pipe.model_label(),
           "nu_spectra": {str(p): s.to_json_dict() for p, s in spectra.items()}},
          pipe.cfg.output)
    return EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    pipe = _pipeline(args)
    traces = pipe.traces()
    if pipe.cfg.format == "csv":
        if args.degree is None:
            raise ValueError("csv trace output needs --degree")
        text = traces[args.degree].to_csv()
        if pipe.cfg.output:
            write_atomic(pipe.cfg.output, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    payload = {"model": pipe.model_label(), "traces": {}}
    for k, tr in sorted(traces.items()):
        payload["traces"][str(k)] = {
            "t": list(tr.grid), "value": list(tr.values),
            "tail_bound": list(tr.tail_bound)}
    _emit(payload, pipe.cfg.output)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    pipe = _pipeline(args)
    fits = pipe.fits()
    _emit({"model": pipe.model_label(),
           "fits": {str(k): f.to_json_dict() for k, f in sorted(fits.items())}},
          pipe.cfg.output)
    return EXIT_OK


def cmd_zeta(args: argparse.Namespace) -> int:
    pipe = _pipeline(args)
    zetas = pipe.zetas()
    _emit({"model": pipe.model_label(),
           "zeta": {str(k): z.to_json_dict() for k, z in sorted(zetas.items())}},
          pipe.cfg.output)
    return EXIT_OK


def cmd_torsion(args: argparse.Namespace) -> int:
    pipe = _pipeline(args)
    report = pipe.torsion()
    payload = {"schema": SCHEMA, "report": report.to_json_dict()}
    text = dumps_canonical(payload)
    if pipe.cfg.output:
        write_atomic(pipe.cfg.output, text)
        stem = pipe.cfg.output.rsplit(".", 1)[0]
        write_atomic(stem + ".csv", report.to_csv())
    else:
        sys.stdout.write(text)
    print(f"log T = {report.log_torsion:.12g}", file=sys.stderr)
    print(f"torsion zeta regular at 0: {report.torsion_zeta_regular} "
          f"(per-degree regular: {report.all_degrees_regular}, "
          f"residues cancel: {report.residues_cancel})", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- selftest --

def _selftest_checks(convention: str, quick: bool):
    geo = fiber.Convention.GEOMETRIC_ORACLE
    conv = fiber.Convention(convention)

    def bessel_closed_form():
        zs = np.geomspace(1e-3, 30, 100 if quick else 1000)
        worst = max(abs(bessel.bessel_i(0.5, z) - math.sqrt(2 / (math.pi * z)) * math.sinh(z))
                    / (math.sqrt(2 / (math.pi * z)) * math.sinh(z)) for z in zs)
        return worst < 1e-12, f"max rel err {worst:.2e}"

    def kernel_images():
        n = 4 if quick else 10
        worst = 0.0
        for t in np.geomspace(1e-3, 1.0, n):
            for x in np.linspace(0.1, 2.0, n):
                for y in np.linspace(0.1, 2.0, n):
                    want = (4 * math.pi * t) ** -0.5 * (
                        math.exp(-((x - y) ** 2) / (4 * t))
                        - math.exp(-((x + y) ** 2) / (4 * t)))
                    got = conekernel.cone_heat_kernel(0.5, t, x, y)
                    if want == 0.0:  # both sides underflow together
                        worst = max(worst, abs(got))
                    else:
                        worst = max(worst, abs(got - want) / abs(want))
        return worst < 1e-10, f"max rel err {worst:.2e}"

    def zeros_exact():
        count = 100 if quick else 500
        zeros = bessel.bessel_j_zeros(0.5, (count + 0.5) * math.pi)
        worst = max(abs(z - k * math.pi) / (k * math.pi)
                    for k, z in enumerate(zeros[:count], start=1))
        j01 = bessel.bessel_j_zeros(0.0, 3.0)[0]
        ok = worst < 1e-12 and abs(j01 - 2.404825557695773) < 1e-10
        return ok, f"k*pi rel err {worst:.2e}, j01 err {abs(j01 - 2.404825557695773):.2e}"

    def dense_a_oracle():
        worst = 0.0
        n = 32 if quick else 64
        for p in range(3):
            dense, kmax = fiber.dense_a_eigenvalues((2 * math.pi,), p, conv, n_modes=n)
            fib = fiber.torus_spectrum((2 * math.pi,), cutoff=kmax * (1 + 1e-12))
            closed = sorted(b.nu2 for b in fiber.a_block_eigenvalues(fib, p, conv)
                            for _ in range(b.mult))
            worst = max(worst, float(np.max(np.abs(np.asarray(closed) - dense))))
        return worst < 1e-9, f"max |closed - dense| {worst:.2e}"

    def theta_fit():
        spec = conekernel.cone_spectrum(fiber.single_nu_spectrum(0.5),
                                        lambda_cutoff=3.4e5, cone_dim=1)
        tr = conekernel.truncated_cone_trace(
            spec, 0, conekernel.log_grid(1e-4, 1e-1, 40))
        tpl = phg.heat_trace_structure(1, 0, even=True, boundary=True, cutoff=1)
        fit = conekernel.fit_expansion(tr, tpl)
        e1 = abs(fit.coefficient(Fraction(-1, 2)) - 1 / (2 * math.sqrt(math.pi)))
        e2 = abs(fit.coefficient(0) + 0.5)
        return e1 < 1e-6 and e2 < 1e-5, f"leading errs {e1:.2e}, {e2:.2e}"

    def zeta_riemann():
        spec = conekernel.cone_spectrum(fiber.single_nu_spectrum(0.5),
                                        lambda_cutoff=3.4e5, cone_dim=1)
        tr = conekernel.truncated_cone_trace(
            spec, 0, conekernel.log_grid(1e-4, 1.0, 241))
        tpl = phg.heat_trace_structure(1, 0, even=True, boundary=True, cutoff=1)
        fit = conekernel.fit_expansion(tr.restrict(t_max=0.1), tpl)
        z = zetator.zeta_near_zero(tr, fit, kernel_dim=0)
        e1 = abs(z.zeta0 + 0.5)
        e2 = abs(z.zeta_prime0 + math.log(2))
        return e1 < 1e-6 and e2 < 1e-5, f"zeta0 err {e1:.2e}, zeta'0 err {e2:.2e}"

    def disk_weyl():
        t_min = 2e-3 if quick else 1e-3
        lam = 36.0 / t_min
        lmax = math.sqrt(lam)
        fib = fiber.circle_spectrum(1.0, cutoff=lmax + 2.0)
        nus = fiber.a_spectrum(fib, 0, geo, nu_max=lmax + 0.5)
        spec = conekernel.cone_spectrum(nus, lam)
        tr = conekernel.truncated_cone_trace(
            spec, 0, conekernel.log_grid(t_min, 1e-1, 121))
        tpl = phg.heat_trace_structure(2, 0, even=True, boundary=True, cutoff=2)
        fit = conekernel.fit_expansion(tr, tpl)
        e1 = abs(fit.coefficient(-1) - 0.25)
        e2 = abs(fit.coefficient(Fraction(-1, 2)) + math.sqrt(math.pi) / 4)
        return e1 < 1e-3 and e2 < 5e-3, f"Weyl errs {e1:.2e}, {e2:.2e}"

    def mckean_singer():
        lam = 800.0
        fib = fiber.circle_spectrum(1.0, cutoff=math.sqrt(lam) + 2.0)
        grid = conekernel.log_grid(0.05, 1.0, 10)
        traces = []
        for p in range(3):
            nus = fiber.a_spectrum(fib, p, geo, nu_max=math.sqrt(lam) + 0.5)
            traces.append(conekernel.truncated_cone_trace(
                conekernel.cone_spectrum(nus, lam), p, grid))
        defect = conekernel.mckean_singer_defect(traces, [0, 0, 0])
        return defect < 1e-6, f"defect {defect:.2e}"

    def gauss_bonnet():
        fib = fiber.circle_spectrum(1.0, cutoff=11.5)
        try:
            s0 = fiber.a_spectrum(fib, 0, conv, nu_max=10.0)
            s1 = fiber.a_spectrum(fib, 1, conv, nu_max=10.0)
            s2 = fiber.a_spectrum(fib, 2, conv, nu_max=10.0)
        except Exception as exc:
            if conv is not geo:
                return "expected-fail", f"literal blocks indefinite ({type(exc).__name__})"
            raise
        even = fiber.NuSpectrum(tuple(sorted(s0.modes + s2.modes, key=lambda m: m.nu)),
                                conv, 10.0)
        ok = fiber.gauss_bonnet_consistency(even, s1, tol=1e-9)
        return ok, "even/odd spectra pair through a common first-order operator"

    def convention_comparison():
        fib = fiber.circle_spectrum(1.0, cutoff=7.0)
        spec = fiber.a_spectrum(fib, 0, conv, nu_max=5.5)
        want = [0.0] + [float(k) for k in range(1, 6) for _ in range(2)]
        got = spec.nu_multiset()
        agrees = len(got) == len(want) and max(
            abs(a - b) for a, b in zip(got, want)) < 1e-12
        if conv is geo:
            return agrees, "flat-plane orders |k| reproduced"
        # literal constants shift the scalar orders: expected to disagree
        return ("expected-fail", "flat-plane oracle differs (nu^2 = k^2 + 1)") \
            if not agrees else (False, "literal constants unexpectedly agree")

    checks = [
        ("bessel_closed_form", bessel_closed_form),
        ("kernel_images", kernel_images),
        ("zeros_exact", zeros_exact),
        ("dense_a_oracle", dense_a_oracle),
        ("theta_fit", theta_fit),
        ("zeta_riemann", zeta_riemann),
        ("mckean_singer", mckean_singer),
        ("gauss_bonnet", gauss_bonnet),
        ("convention_comparison", convention_comparison),
    ]
    if not quick:
        checks.insert(6, ("disk_weyl", disk_weyl))
    return checks


def cmd_selftest(args: argparse.Namespace) -> int:
    convention = CONVENTION_ALIASES[args.convention or "GeometricOracle"]
    checks = _selftest_checks(convention, args.quick)
    failures = 0
    width = max(len(name) for name, _ in checks)
    for name, run in checks:
        start = time.perf_counter()
        try:
            status, detail = run()
        except Exception as exc:  # a crashed oracle is a failure, not an abort
            status, detail = False, f"raised {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        if status == "expected-fail":
            tag = "EXPECTED-FAIL"
        elif status:
            tag = "PASS"
        else:
            tag = "FAIL"
            failures += 1
        print(f"{name:<{width}}  {tag:<13} {elapsed:7.2f}s  {detail}")
    print(f"{'-' * (width + 24)}")
    print(f"{failures} failure(s)")
    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


# ------------------------------------------------------------------ parser --

def _add_model_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="TOML-style key=value config file")
    sub.add_argument("--model", choices=["cone", "product"])
    sub.add_argument("--fiber", dest="fiber_kind", choices=["circle", "torus"])
    sub.add_argument("--radius", type=float, help="fiber circle radius")
    sub.add_argument("--periods", type=float, nargs="+", help="fiber torus periods")
    sub.add_argument("--base", choices=["point", "circle", "torus"])
    sub.add_argument("--base-radius", dest="base_radius", type=float)
    sub.add_argument("--base-periods", dest="base_periods", type=float, nargs="+")
    sub.add_argument("--convention",
                     choices=sorted(CONVENTION_ALIASES))
    sub.add_argument("--nu-max", dest="nu_max", type=float)
    sub.add_argument("--lambda-max", dest="lambda_max", type=float)
    sub.add_argument("--t-min", dest="t_min", type=float)
    sub.add_argument("--t-max", dest="t_max", type=float)
    sub.add_argument("--points", type=int)
    sub.add_argument("--even", dest="even", action="store_const", const=True)
    sub.add_argument("--no-even", dest="even", action="store_const", const=False)
    sub.add_argument("--single-nu", dest="single_nu", type=float,
                     help="replace the model by one radial mode of this order")
    sub.add_argument("--template-cutoff", dest="template_cutoff")
    sub.add_argument("--split", type=float, help="Mellin split point")
    sub.add_argument("--output", "-o")
    sub.add_argument("--format", choices=["json", "csv"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torsionlab",
        description="heat traces, zeta functions and analytic torsion of model edge spaces")
    subs = parser.add_subparsers(dest="command", required=True)

    st = subs.add_parser("structure", help="symbolic expansion template and pole report")
    st.add_argument("--m", type=int, required=True)
    st.add_argument("--b", type=int, required=True)
    st.add_argument("--even", action="store_true")
    st.add_argument("--boundary", action="store_true")
    st.add_argument("--cutoff", default="3")
    st.add_argument("--output", "-o")
    st.set_defaults(func=cmd_structure)

    for name, func, help_text in [
        ("spectrum", cmd_spectrum, "nu spectra of the configured model"),
        ("trace", cmd_trace, "per-degree heat traces"),
        ("fit", cmd_fit, "fitted expansion coefficients"),
        ("zeta", cmd_zeta, "per-degree zeta data near s = 0"),
        ("torsion", cmd_torsion, "full analytic-torsion pipeline"),
    ]:
        sub = subs.add_parser(name, help=help_text)
        _add_model_flags(sub)
        if name == "trace":
            sub.add_argument("--degree", type=int)
        sub.set_defaults(func=func)

    se = subs.add_parser("selftest", help="oracle suite")
    se.add_argument("--quick", action="store_true")
    se.add_argument("--convention", choices=sorted(CONVENTION_ALIASES))
    se.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    threads = os.environ.get("TORSIONLAB_THREADS")
    if threads:
        os.environ.setdefault("OMP_NUM_THREADS", threads)
        os.environ.setdefault("OPENBLAS_NUM_THREADS", threads)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_IO
    except (TorsionLabError, OSError, ValueError, KeyError) as exc:
        code = _mode_error(exc)
        sys.stderr.write(dumps_canonical(
            {"error": type(exc).__name__, "message": str(exc), "exit_code": code}))
        return code


if __name__ == "__main__":
    sys.exit(main())
