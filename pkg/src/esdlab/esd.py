"""Fidelity decay and entanglement-sudden-death times.

The gap ``G = F(t) - 1/d`` decides separability of isotropic states. Both
noise models give a fidelity that is affine in the decay factor
``gamma_tilde = exp(-rate * t / 2)``, so ``G`` falls monotonically with ``t``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .dephasing import NoiseModel, NoiseParams, NoiseScenario
from .isotropic import IsotropicState, UnsupportedDimensionError, _check_d

ASYMPTOTIC_TOL = 1e-12
DEFAULT_REL_TOL = 1e-10
MAX_ITER = 200


class ConvergenceError(RuntimeError):
    def __init__(self, msg: str, bracket: tuple[float, float]):
        super().__init__(f"{msg} (bracket [{bracket[0]!r}, {bracket[1]!r}])")
        self.bracket = bracket


def _check_args(d: int, f0: float, gamma_tilde: float) -> None:
    _check_d(d)
    if not 0.0 <= f0 <= 1.0:
        raise ValueError(f"F0 must lie in [0, 1], got {f0}")
    if not 0.0 <= gamma_tilde <= 1.0:
        raise ValueError(f"gamma_tilde must lie in [0, 1], got {gamma_tilde}")


@dataclass(frozen=True)
class FidelityBreakdown:
    """``F = c1*n1 + c2*n2 + c3*n3`` over the diagonal of ``rho(t) P``.

    ``c1`` is the ``|00>`` term, ``c2`` each of the ``d - 1`` other ``|jj>``
    terms; the remaining ``d**4 - d`` entries of the product (class 3) add
    nothing to the trace, so ``c3 = 0``.
    """

    c1: float
    c2: float
    c3: float
    n1: int
    n2: int
    n3: int
    total: float


def fidelity_simple(d: int, f0: float, gamma_tilde: float) -> FidelityBreakdown:
    _check_args(d, f0, gamma_tilde)
    s = IsotropicState(d, f0)
    eps, zd = s.epsilon, s.zeta / d
    c1 = (eps + zd) / d + zd * gamma_tilde * (d - 1) / d
    c2 = zd * gamma_tilde / d + (eps + zd) / d + zd * (d - 2) / d
    n1, n2, n3 = 1, d - 1, d**4 - d
    return FidelityBreakdown(c1, c2, 0.0, n1, n2, n3, c1 * n1 + c2 * n2)


def fidelity_simple_printed(d: int, f0: float, gamma_tilde: float) -> float:
    """Collected form ``2[(d^2 F0 - 1) g + d^2 (d-1) F0 / 2 + 1] / (d^3 + d^2)``."""
    _check_args(d, f0, gamma_tilde)
    return 2.0 * ((d * d * f0 - 1.0) * gamma_tilde + d * d * (d - 1) * f0 / 2.0 + 1.0) / (d**3 + d**2)


def fidelity_full(d: int, f0: float, gamma_tilde: float) -> float:
    _check_args(d, f0, gamma_tilde)
    s = IsotropicState(d, f0)
    return s.epsilon + s.zeta / d + s.zeta * gamma_tilde * (d - 1) / d


def fidelity(d: int, f0: float, model: NoiseModel, gamma_tilde: float) -> float:
    if model is NoiseModel.SIMPLE:
        return fidelity_simple(d, f0, gamma_tilde).total
    return fidelity_full(d, f0, gamma_tilde)


def gap(d: int, f0: float, model: NoiseModel, gamma_tilde: float) -> float:
    return fidelity(d, f0, model, gamma_tilde) - 1.0 / d


def critical_gamma_tilde(d: int, f0: float, model: NoiseModel) -> Optional[float]:
    """Decay factor at which ``G = 0``, or None if no crossing in [0, 1]."""
    g0 = gap(d, f0, model, 0.0)
    g1 = gap(d, f0, model, 1.0)
    if g1 <= 0.0 or g0 >= 0.0:
        return None
    return -g0 / (g1 - g0)


def esd_time_analytic(d: int, model: NoiseModel, effective_rate: float) -> float:
    """Death time for the family ``F0 = 1/(d - 1)``.

    simple: ``(2/rate) ln[2(d^2 - d + 1) / ((d - 1)(d - 2))]``
    full:   ``(2/rate) ln[(d^2 - d + 1) / (d (d - 2))]``
    """
    if int(d) != d or d <= 2:
        raise UnsupportedDimensionError(f"F0 = 1/(d-1) is singular for d <= 2, got d={d}")
    if not effective_rate > 0.0:
        raise ValueError(f"effective rate must be > 0, got {effective_rate}")
    if model is NoiseModel.SIMPLE:
        arg = 2.0 * (d * d - d + 1) / ((d - 1) * (d - 2))
    else:
        arg = (d * d - d + 1) / (d * (d - 2))
    return 2.0 / effective_rate * math.log(arg)


class EsdStatus(enum.Enum):
    ALREADY_SEPARABLE = "AlreadySeparable"
    FINITE_DEATH = "FiniteDeath"
    ASYMPTOTIC_ONLY = "AsymptoticOnly"
    NEVER_SEPARATES = "NeverSeparates"


@dataclass(frozen=True)
class EsdResult:
    status: EsdStatus
    f_infinity: float
    gap_at_zero: float
    effective_rate: float
    death_time: Optional[float] = None
    gamma_tilde_star: Optional[float] = None
    iterations: int = 0


def bisect_decreasing(g, lo: float, hi: float, rel_tol: float, max_iter: int = MAX_ITER):
    """Root of a decreasing function with ``g(lo) > 0 >= g(hi)``.

    Stops once the bracket width is below ``rel_tol * hi``.
    Returns ``(root, iterations)``.
    """
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            return 0.5 * (lo + hi), it
    raise ConvergenceError("bisection did not converge", (lo, hi))


def esd_time_numeric(
    d: int,
    f0: float,
    model: NoiseModel,
    scenario: NoiseScenario,
    params: NoiseParams,
    rel_tol: float = DEFAULT_REL_TOL,
    max_iter: int = MAX_ITER,
) -> EsdResult:
    """Classify the fate of ``(d, F0)`` and locate the death time by bisection on ``t``.

    The upper end of the bracket starts at ``1/rate`` and doubles until the
    gap turns nonpositive.
    """
    _check_d(d)
    rate = params.effective_rate(scenario)
    g0 = gap(d, f0, model, 1.0)
    common = dict(gap_at_zero=g0, effective_rate=rate)

    if f0 <= 1.0 / d:
        return EsdResult(EsdStatus.ALREADY_SEPARABLE, fidelity(d, f0, model, 0.0), **common)
    if rate == 0.0:
        return EsdResult(EsdStatus.NEVER_SEPARATES, fidelity(d, f0, model, 1.0), **common)

    f_inf = fidelity(d, f0, model, 0.0)
    if abs(f_inf - 1.0 / d) <= ASYMPTOTIC_TOL:
        return EsdResult(EsdStatus.ASYMPTOTIC_ONLY, f_inf, **common)
    if f_inf > 1.0 / d:
        return EsdResult(EsdStatus.NEVER_SEPARATES, f_inf, **common)

    def g(t: float) -> float:
        return gap(d, f0, model, math.exp(-rate * t / 2.0))

    hi = 1.0 / rate
    for _ in range(max_iter):
        if g(hi) <= 0.0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the death time", (0.0, hi))

    t_star, iters = bisect_decreasing(g, 0.0, hi, rel_tol, max_iter)
    return EsdResult(
        EsdStatus.FINITE_DEATH,
        f_inf,
        death_time=t_star,
        gamma_tilde_star=math.exp(-rate * t_star / 2.0),
        iterations=iters,
        **common,
    )


def esd_threshold(d: int, model: NoiseModel) -> float:
    """Largest ``F0`` for which the gap reaches zero in finite time.

    ``F_inf`` is affine in ``F0``; solving ``F_inf(F0) = 1/d`` gives
    ``(d + 2)/d**2`` for the simple model and 1 for the full model.
    """
    _check_d(d, minimum=3)
    a = fidelity(d, 0.0, model, 0.0)
    b = fidelity(d, 1.0, model, 0.0)
    if abs(b - 1.0 / d) <= ASYMPTOTIC_TOL:
        return 1.0
    return min((1.0 / d - a) / (b - a), 1.0)
