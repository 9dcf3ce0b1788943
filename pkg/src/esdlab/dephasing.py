"""Local dephasing noise on qudit pairs.

Two noise models are provided:

* ``SIMPLE``: each level ``k >= 1`` dephases relative to the ground level
  ``k = 0`` only, through the two-operator Kraus sets built by
  :func:`kraus_simple`.
* ``FULL``: every pair of distinct local levels dephases at the same rate.
  It is applied as an elementwise (Schur) product with a PSD damping matrix,
  which keeps isotropic states isotropic.

Time enters only through ``gamma(t) = exp(-rate * t / 2)``; there is no
time stepping.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .densmat import (
    DEFAULT_TOL,
    DensityMatrix,
    KrausSet,
    Tolerances,
    apply_channel,
    validate_density,
)
from .isotropic import IsotropicState, _check_d

Side = Literal["A", "B"]

PSD_CERT_TOL = 1e-12


class NoiseScenario(enum.Enum):
    A = "a"
    B = "b"
    BOTH = "both"

    @property
    def sides(self) -> tuple[Side, ...]:
        return {"a": ("A",), "b": ("B",), "both": ("A", "B")}[self.value]


class NoiseModel(enum.Enum):
    SIMPLE = "simple"
    FULL = "full"


@dataclass(frozen=True)
class NoiseParams:
    rate_a: float
    rate_b: float

    def __post_init__(self):
        for r in (self.rate_a, self.rate_b):
            if not (math.isfinite(r) and r >= 0.0):
                raise ValueError(f"dephasing rates must be finite and >= 0, got {r}")

    @classmethod
    def equal(cls, rate: float) -> NoiseParams:
        return cls(rate, rate)

    def effective_rate(self, scenario: NoiseScenario) -> float:
        return {
            NoiseScenario.A: self.rate_a,
            NoiseScenario.B: self.rate_b,
            NoiseScenario.BOTH: self.rate_a + self.rate_b,
        }[scenario]


@dataclass(frozen=True)
class DephasingFactors:
    gamma_a: float
    gamma_b: float
    omega_a: float
    omega_b: float
    gamma_tilde: float
    effective_rate: float

    def gamma(self, side: Side) -> float:
        return self.gamma_a if side == "A" else self.gamma_b

    def omega(self, side: Side) -> float:
        return self.omega_a if side == "A" else self.omega_b


def decay_factors(t: float, params: NoiseParams, scenario: NoiseScenario) -> DephasingFactors:
    if not t >= 0.0:
        raise ValueError(f"time must be >= 0, got {t}")
    ga = math.exp(-params.rate_a * t / 2.0)
    gb = math.exp(-params.rate_b * t / 2.0)
    gt = {NoiseScenario.A: ga, NoiseScenario.B: gb, NoiseScenario.BOTH: ga * gb}[scenario]
    return DephasingFactors(
        gamma_a=ga,
        gamma_b=gb,
        omega_a=math.sqrt(1.0 - ga * ga),
        omega_b=math.sqrt(1.0 - gb * gb),
        gamma_tilde=gt,
        effective_rate=params.effective_rate(scenario),
    )


def _on_side(local: np.ndarray, d: int, side: Side) -> np.ndarray:
    eye = np.eye(d)
    return np.kron(local, eye) if side == "A" else np.kron(eye, local)


def kraus_simple(d: int, side: Side, factors: DephasingFactors) -> KrausSet:
    """Ground-referenced dephasing on one qudit.

    ``diag(1, g, ..., g)`` and ``diag(0, w, ..., w)`` with ``w = sqrt(1 - g**2)``,
    tensored with the identity on the other qudit.
    """
    _check_d(d)
    g, w = factors.gamma(side), factors.omega(side)
    k1 = np.full(d, g, dtype=float)
    k1[0] = 1.0
    k2 = np.full(d, w, dtype=float)
    k2[0] = 0.0
    return KrausSet((_on_side(np.diag(k1), d, side), _on_side(np.diag(k2), d, side)))


def kraus_full(d: int, side: Side, factors: DephasingFactors) -> KrausSet:
    """Kraus form of the all-pairs dephasing map on one qudit.

    Obtained by diagonalising :func:`single_side_damping`: ``sqrt(g) I`` plus
    ``sqrt(1 - g) |k><k|`` for each level. Used as an independent route to the
    Schur-product implementation.
    """
    _check_d(d)
    g = factors.gamma(side)
    ops = [_on_side(math.sqrt(g) * np.eye(d), d, side)]
    for k in range(d):
        proj = np.zeros((d, d))
        proj[k, k] = math.sqrt(1.0 - g)
        ops.append(_on_side(proj, d, side))
    return KrausSet(tuple(ops))


def single_side_damping(d: int, gamma: float) -> np.ndarray:
    """``gamma * ones + (1 - gamma) * I``; certified PSD before it is returned."""
    c = gamma * np.ones((d, d)) + (1.0 - gamma) * np.eye(d)
    lam = np.linalg.eigvalsh(c)[0]
    if lam < -PSD_CERT_TOL:
        raise AssertionError(f"damping matrix not PSD (min eigenvalue {lam:.3e}) for gamma={gamma}")
    return c


def damping_matrix(d: int, factors: DephasingFactors, scenario: NoiseScenario) -> np.ndarray:
    sides = scenario.sides
    ca = single_side_damping(d, factors.gamma_a) if "A" in sides else np.ones((d, d))
    cb = single_side_damping(d, factors.gamma_b) if "B" in sides else np.ones((d, d))
    return np.kron(ca, cb)


def apply_full_dephasing(
    rho,
    d: int,
    factors: DephasingFactors,
    scenario: NoiseScenario,
    tol: Tolerances = DEFAULT_TOL,
) -> DensityMatrix:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if m.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d}x{d * d} matrix, got {m.shape}")
    return validate_density(m * damping_matrix(d, factors, scenario), tol)


def evolve_with_factors(
    rho0,
    d: int,
    model: NoiseModel,
    scenario: NoiseScenario,
    factors: DephasingFactors,
    tol: Tolerances = DEFAULT_TOL,
) -> DensityMatrix:
    """Brute-force evolution for precomputed decay factors."""
    if model is NoiseModel.FULL:
        return apply_full_dephasing(rho0, d, factors, scenario, tol)
    rho = rho0 if isinstance(rho0, DensityMatrix) else validate_density(rho0, tol)
    if rho.dim_total != d * d:
        raise ValueError(f"expected a {d * d}x{d * d} matrix, got {rho.matrix.shape}")
    for side in scenario.sides:
        ks = kraus_simple(d, side, factors)
        assert ks.is_self_adjoint(), "built-in Kraus sets must be self-adjoint"
        rho = apply_channel(rho, ks, tol)
    return rho


def evolve(
    rho0,
    d: int,
    model: NoiseModel,
    scenario: NoiseScenario,
    params: NoiseParams,
    t: float,
    tol: Tolerances = DEFAULT_TOL,
) -> DensityMatrix:
    """Evolve ``rho0`` to time ``t`` under the chosen dephasing model."""
    return evolve_with_factors(rho0, d, model, scenario, decay_factors(t, params, scenario), tol)


def evolved_closed_form(d: int, f0: float, model: NoiseModel, factors: DephasingFactors) -> DensityMatrix:
    """Evolved isotropic state written down directly from the decay factor.

    Simple model: only the coherences between ``|00>`` and the other
    ``|jj>`` (first row and column of the doubled-index block) pick up
    ``gamma_tilde``. Full model: every nonzero coherence does.
    """
    m = IsotropicState(d, f0).matrix()
    gt = factors.gamma_tilde
    doubled = np.arange(d) * (d + 1)
    if model is NoiseModel.SIMPLE:
        m[0, doubled[1:]] *= gt
        m[doubled[1:], 0] *= gt
    else:
        block = np.ix_(doubled, doubled)
        sub = m[block]
        off = ~np.eye(d, dtype=bool)
        sub[off] *= gt
        m[block] = sub
    return validate_density(m)
