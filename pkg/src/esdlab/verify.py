"""Self-verification suites behind ``esdlab verify``.

Each suite compares two independent routes (closed form against brute-force
matrix evolution, analytic against numeric root finding, and so on) and
reports the largest residual it saw.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import esd
from .densmat import (
    apply_channel,
    apply_channel_conventional,
    fidelity_with_projector,
    hermiticity_residual,
    max_entangled,
    min_eigenvalue,
    partial_transpose,
)
from .dephasing import (
    DephasingFactors,
    NoiseModel,
    NoiseParams,
    NoiseScenario,
    apply_full_dephasing,
    decay_factors,
    evolve_with_factors,
    evolved_closed_form,
    kraus_full,
    kraus_simple,
)
from .isotropic import (
    IsotropicState,
    _linear,
    _middle,
    eof_isotropic,
    is_separable,
    isotropic_fidelity,
    make_isotropic,
)

TIMES = (0.0, 0.5, 1.0, 2.0, 5.0, 20.0)
UNIT_RATE = NoiseParams.equal(1.0)

FactorsFn = Callable[[float, NoiseParams, NoiseScenario], DephasingFactors]


def omega_sign_fault(t: float, params: NoiseParams, scenario: NoiseScenario) -> DephasingFactors:
    """Decay factors with ``omega = sqrt(1 + gamma**2)``; a test hook for fault injection."""
    f = decay_factors(t, params, scenario)
    return DephasingFactors(
        f.gamma_a,
        f.gamma_b,
        math.sqrt(1.0 + f.gamma_a**2),
        math.sqrt(1.0 + f.gamma_b**2),
        f.gamma_tilde,
        f.effective_rate,
    )


FAULTS: dict[str, FactorsFn] = {"omega-sign": omega_sign_fault}


@dataclass
class SuiteResult:
    name: str
    tolerance: float
    max_residual: float = 0.0
    cases: int = 0
    failure: Optional[str] = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failure is None

    def check(self, residual: float, case: str, tol: Optional[float] = None) -> None:
        tol = self.tolerance if tol is None else tol
        self.cases += 1
        if not residual <= tol:  # NaN fails too
            if self.failure is None:
                self.failure = f"{case}: residual {residual:.3e} > {tol:.1e}"
        if math.isfinite(residual):
            self.max_residual = max(self.max_residual, residual)
        else:
            self.max_residual = math.inf

    def require(self, ok: bool, case: str) -> None:
        self.cases += 1
        if not ok and self.failure is None:
            self.failure = case


@dataclass
class Report:
    suites: list[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def lines(self) -> list[str]:
        out = []
        for s in self.suites:
            status = "PASS" if s.passed else "FAIL"
            line = (
                f"{status} {s.name:<26} cases={s.cases:<5d} max_residual={s.max_residual:.3e} "
                f"tol={s.tolerance:.0e} ({s.seconds:.2f}s)"
            )
            if s.failure:
                line += f"\n     failing case: {s.failure}"
            out.append(line)
        return out


def _f0_values(d: int) -> tuple[float, ...]:
    return (0.3, 1.0 / (d - 1), 0.9)


def kraus_completeness(dmax: int, factors_fn: FactorsFn) -> SuiteResult:
    res = SuiteResult("kraus_completeness", 1e-12)
    for d in range(2, dmax + 1):
        for t in TIMES:
            f = factors_fn(t, UNIT_RATE, NoiseScenario.BOTH)
            for side in ("A", "B"):
                for name, build in (("simple", kraus_simple), ("full", kraus_full)):
                    case = f"d={d} t={t} side={side} kraus={name}"
                    try:
                        ks = build(d, side, f)
                    except Exception as exc:  # construction itself enforces completeness
                        res.require(False, f"{case}: {exc}")
                        continue
                    res.check(ks.completeness_residual(), case + " sum K^dag K")
                    res.check(ks.unitality_residual(), case + " sum K K^dag")
    return res


def _random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return m / np.trace(m).real


def channel_physicality(dmax: int, factors_fn: FactorsFn) -> SuiteResult:
    """Trace, Hermiticity, positivity and unitality for every built-in channel."""
    res = SuiteResult("channel_physicality", 1e-12)
    rng = np.random.default_rng(20240611)
    for d in range(2, dmax + 1):
        dim = d * d
        inputs = [make_isotropic(d, f).matrix for f in (0.0, 0.5, 1.0)]
        inputs.append(_random_density(dim, rng))
        mixed = np.eye(dim) / dim
        for t in TIMES:
            f = factors_fn(t, UNIT_RATE, NoiseScenario.BOTH)
            maps = {}
            try:
                for side in ("A", "B"):
                    for name, build in (("simple", kraus_simple), ("fullkraus", kraus_full)):
                        ks = build(d, side, f)
                        maps[f"{name}-{side}"] = (
                            lambda r, ks=ks: apply_channel(r, ks).matrix,
                            ks,
                        )
                for sc in NoiseScenario:
                    maps[f"schur-{sc.value}"] = (
                        lambda r, sc=sc: apply_full_dephasing(r, d, f, sc).matrix,
                        None,
                    )
            except Exception as exc:
                res.require(False, f"d={d} t={t}: channel construction failed: {exc}")
                continue
            for label, (fn, ks) in maps.items():
                case = f"d={d} t={t} channel={label}"
                try:
                    for r in inputs:
                        out = fn(r)
                        res.check(abs(np.trace(out) - np.trace(r)), case + " trace")
                        res.check(hermiticity_residual(out), case + " hermiticity")
                        res.check(max(0.0, -min_eigenvalue(out)), case + " psd", tol=1e-10)
                        if ks is not None:
                            res.check(
                                float(np.max(np.abs(out - apply_channel_conventional(r, ks)))),
                                case + " K^dag rho K vs K rho K^dag",
                            )
                    res.check(float(np.max(np.abs(fn(mixed) - mixed))), case + " unital")
                except Exception as exc:
                    res.require(False, f"{case}: {exc}")
    return res


def oracle_equivalence(dmax: int, factors_fn: FactorsFn) -> SuiteResult:
    """Closed-form fidelities and matrices against brute-force evolution."""
    res = SuiteResult("oracle_equivalence", 1e-12)
    for d in range(2, dmax + 1):
        proj = max_entangled(d)
        for f0 in _f0_values(d):
            rho0 = make_isotropic(d, f0)
            for t in TIMES:
                for sc in NoiseScenario:
                    f = factors_fn(t, UNIT_RATE, sc)
                    for model in NoiseModel:
                        case = f"d={d} F0={f0:.6g} t={t} scenario={sc.value} model={model.value}"
                        try:
                            brute = evolve_with_factors(rho0, d, model, sc, f)
                            closed = esd.fidelity(d, f0, model, f.gamma_tilde)
                            res.check(abs(fidelity_with_projector(brute, proj) - closed), case + " fidelity")
                            cf = evolved_closed_form(d, f0, model, f)
                            res.check(float(np.max(np.abs(brute.matrix - cf.matrix))), case + " matrix", tol=1e-13)
                        except Exception as exc:
                            res.require(False, f"{case}: {exc}")
    return res


def closed_form_consistency(dmax: int, factors_fn: FactorsFn) -> SuiteResult:
    res = SuiteResult("closed_form_consistency", 1e-14)
    for d in range(2, 11):
        for f0 in np.linspace(0.0, 1.0, 11):
            f0 = float(f0)
            for model in NoiseModel:
                res.check(abs(esd.fidelity(d, f0, model, 1.0) - f0), f"d={d} F0={f0} model={model.value} at t=0")
            for g in (0.0, 0.25, 0.5, 1.0):
                b = esd.fidelity_simple(d, f0, g)
                res.check(abs(b.total - esd.fidelity_simple_printed(d, f0, g)), f"d={d} F0={f0} g={g} collected form")
    return res


def initial_gap(dmax: int, factors_fn: FactorsFn) -> SuiteResult:
    res = SuiteResult("initial_gap", 1e-14)
    for d in range(3, 13):
        for model in NoiseModel:
            g = esd.gap(d, 1.0 / (d - 1), model, 1.0)
            res.check(abs(g - 1.0 / (d * (d - 1))), f"d={d} model={model.value}")
    return res


def eof_branch_continuity(dmax: int, factors_fn: FactorsFn) -> SuiteResult:
    res = SuiteResult("eof_branch_continuity", 1e-12)
    for d in range(3, 11):
        lo, hi = 1.0 / d, 4.0 * (d - 1) / d**2
        res.check(abs(_middle(d, lo)[2]), f"d={d} F=1/d middle vs zero")
        res.check(abs(_middle(d, hi)[2] - _linear(d, hi)), f"d={d} F=4(d-1)/d^2 middle vs linear")
        res.check(abs(eof_isotropic(d, 1.0).eof - math.log2(d)), f"d={d} E_f(1) vs log2 d")
        grid = np.linspace(lo, 1.0, 1000)
        vals = np.array([eof_isotropic(d, float(x)).eof for x in grid])
        res.check(max(0.0, -float(np.min(np.diff(vals)))), f"d={d} monotonicity")
        for x, v in zip(grid, vals):
            res.require(is_separable(d, float(x)) == (v == 0.0), f"d={d} F={x} separability vs E_f")
    return res


def analytic_vs_numeric(dmax: int, factors_fn: FactorsFn) -> SuiteResult:
    res = SuiteResult("analytic_vs_numeric", 1e-9)
    for d in range(3, 13):
        for model in NoiseModel:
            case = f"d={d} model={model.value}"
            try:
                r = esd.esd_time_numeric(d, 1.0 / (d - 1), model, NoiseScenario.A, UNIT_RATE)
                a = esd.esd_time_analytic(d, model, 1.0)
                res.require(r.status is esd.EsdStatus.FINITE_DEATH, f"{case}: status {r.status.value}")
                if r.death_time is not None:
                    res.check(abs(r.death_time - a) / a, case)
            except Exception as exc:
                res.require(False, f"{case}: {exc}")
    return res


def full_model_headline(dmax: int, factors_fn: FactorsFn) -> SuiteResult:
    """Entanglement is positive at t=0 and exactly zero from a finite time on.

    The evolved state is not isotropic for 0 < gamma_tilde < 1, so besides the
    isotropic-formula statement the suite checks the exact state directly:
    its distance from the isotropic family must match
    ``|zeta| (1 - g)(d - 1) / (d (d + 1))`` and its partial transpose must be
    positive exactly when ``F(t) <= 1/d``.
    """
    res = SuiteResult("full_model_headline", 1e-12)
    for d in range(3, 13):
        f0 = 1.0 / (d - 1)
        zeta = IsotropicState(d, f0).zeta
        case = f"d={d} F0=1/(d-1)"
        try:
            r = esd.esd_time_numeric(d, f0, NoiseModel.FULL, NoiseScenario.A, UNIT_RATE)
            res.require(eof_isotropic(d, f0).eof > 0.0, f"{case}: E_f(F0) not positive")
            res.require(r.death_time is not None and math.isfinite(r.death_time), f"{case}: no finite death")
            if r.death_time is None:
                continue
            rho0 = make_isotropic(d, f0)
            tdeath = r.death_time * (1.0 + 1e-9)
            for t in [0.0, 0.5 * tdeath] + [tdeath * k for k in (1.0, 1.5, 2.0, 5.0, 20.0)]:
                f = factors_fn(t, UNIT_RATE, NoiseScenario.A)
                rho = evolve_with_factors(rho0, d, NoiseModel.FULL, NoiseScenario.A, f)
                fit = isotropic_fidelity(rho, d)
                expected = abs(zeta) * (1.0 - f.gamma_tilde) * (d - 1) / (d * (d + 1))
                res.check(abs(fit.residual - expected), f"{case} t={t:.6g} isotropy residual")
                e = eof_isotropic(d, esd.fidelity_full(d, f0, f.gamma_tilde)).eof
                ppt = min_eigenvalue(partial_transpose(rho, d))
                if t >= tdeath:
                    res.require(e == 0.0, f"{case} t={t:.6g}: E_f={e!r} after death")
                    res.require(ppt >= -1e-12, f"{case} t={t:.6g}: partial transpose not PSD after death")
                else:
                    res.require(e > 0.0, f"{case} t={t:.6g}: E_f not positive before death")
                    res.require(ppt < 0.0, f"{case} t={t:.6g}: state PPT before death")
        except Exception as exc:
            res.require(False, f"{case}: {exc}")
    return res


def model_ordering(dmax: int, factors_fn: FactorsFn) -> SuiteResult:
    res = SuiteResult("model_ordering_thresholds", 1e-12)
    for d in range(3, 13):
        ts = esd.esd_time_analytic(d, NoiseModel.SIMPLE, 1.0)
        tf = esd.esd_time_analytic(d, NoiseModel.FULL, 1.0)
        res.require(tf < ts, f"d={d}: full {tf} not below simple {ts}")
        th = esd.esd_threshold(d, NoiseModel.SIMPLE)
        res.check(abs(th - (d + 2) / d**2), f"d={d} simple threshold")
        below = esd.esd_time_numeric(d, th - 1e-3, NoiseModel.SIMPLE, NoiseScenario.A, UNIT_RATE)
        above = esd.esd_time_numeric(d, th + 1e-3, NoiseModel.SIMPLE, NoiseScenario.A, UNIT_RATE)
        res.require(below.status is esd.EsdStatus.FINITE_DEATH, f"d={d}: threshold-1e-3 gives {below.status.value}")
        res.require(above.status is esd.EsdStatus.NEVER_SEPARATES, f"d={d}: threshold+1e-3 gives {above.status.value}")
    r = esd.esd_time_numeric(3, 0.57, NoiseModel.SIMPLE, NoiseScenario.A, UNIT_RATE)
    res.require(r.status is esd.EsdStatus.NEVER_SEPARATES, "d=3 F0=0.57 simple")
    r = esd.esd_time_numeric(3, 1.0, NoiseModel.FULL, NoiseScenario.A, UNIT_RATE)
    res.require(r.status is esd.EsdStatus.ASYMPTOTIC_ONLY, "d=3 F0=1 full")
    return res


SUITES = (
    kraus_completeness,
    channel_physicality,
    oracle_equivalence,
    closed_form_consistency,
    initial_gap,
    eof_branch_continuity,
    analytic_vs_numeric,
    full_model_headline,
    model_ordering,
)


def run_verification(dmax: int = 6, fault: Optional[str] = None) -> Report:
    factors_fn = FAULTS[fault] if fault else decay_factors
    report = Report()
    for suite in SUITES:
        start = time.perf_counter()
        try:
            res = suite(dmax, factors_fn)
        except Exception as exc:
            res = SuiteResult(suite.__name__, 0.0, failure=f"suite raised {type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - start
        report.suites.append(res)
    return report
