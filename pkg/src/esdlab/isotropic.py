"""Isotropic qudit-pair states and their entanglement of formation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .densmat import (
    DEFAULT_TOL,
    DensityMatrix,
    Tolerances,
    fidelity_with_projector,
    max_entangled,
    validate_density,
)

BRANCH_TOL = 1e-12


class UnsupportedDimensionError(ValueError):
    pass


def _check_d(d: int, minimum: int = 2) -> None:
    if int(d) != d or d < minimum:
        raise UnsupportedDimensionError(f"local dimension must be an integer >= {minimum}, got {d}")


def _check_f(f: float) -> None:
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {f}")


@dataclass(frozen=True)
class IsotropicState:
    """Mixture ``epsilon * I + zeta * P(Psi)`` parametrised by its fidelity.

    ``zeta`` is negative below ``F = 1/d**2``. The state stays positive: its
    spectrum is ``epsilon`` (multiplicity ``d**2 - 1``) and ``epsilon + zeta = F``.
    """

    d: int
    fidelity: float

    def __post_init__(self):
        _check_d(self.d)
        _check_f(self.fidelity)

    @property
    def epsilon(self) -> float:
        return (1.0 - self.fidelity) / (self.d**2 - 1)

    @property
    def zeta(self) -> float:
        return (self.fidelity * self.d**2 - 1.0) / (self.d**2 - 1)

    def matrix(self) -> np.ndarray:
        d = self.d
        m = np.zeros((d * d, d * d), dtype=complex)
        doubled = np.arange(d) * (d + 1)
        m[np.ix_(doubled, doubled)] = self.zeta / d
        m[np.diag_indices(d * d)] += self.epsilon
        return m


def make_isotropic(d: int, fidelity: float, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    return validate_density(IsotropicState(d, fidelity).matrix(), tol)


class IsotropyFit(NamedTuple):
    fidelity: float
    residual: float


def isotropic_fidelity(rho, d: int) -> IsotropyFit:
    """Fidelity of ``rho`` with ``|Psi(d)>`` and its distance from the isotropic family.

    ``residual`` is the max elementwise gap between ``rho`` and the isotropic
    state of the same fidelity. Only when it is small does
    :func:`eof_isotropic` describe ``rho``.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if m.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d}x{d * d} matrix, got {m.shape}")
    f = fidelity_with_projector(m, max_entangled(d))
    resid = float(np.max(np.abs(m - IsotropicState(d, f).matrix())))
    return IsotropyFit(f, resid)


def critical_fidelity(d: int) -> float:
    _check_d(d)
    return 1.0 / d


def is_separable(d: int, fidelity: float) -> bool:
    _check_d(d)
    return fidelity <= 1.0 / d


class Branch(enum.Enum):
    SEPARABLE = "separable"
    MIDDLE = "middle"
    LINEAR = "linear"


@dataclass(frozen=True)
class EofTerms:
    xi: float
    h2: float
    r: float
    branch: Branch
    eof: float


def binary_entropy(x: float) -> float:
    """H2(x) in bits, with 0 log 0 = 0."""
    return -sum(p * math.log2(p) for p in (x, 1.0 - x) if p > 0.0)


def _xi(d: int, f: float) -> float:
    x = (math.sqrt(f) + math.sqrt((d - 1) * (1.0 - f))) ** 2 / d
    return min(max(x, 0.0), 1.0)


def _middle(d: int, f: float) -> tuple[float, float, float]:
    xi = _xi(d, f)
    h2 = binary_entropy(xi)
    return xi, h2, h2 + (1.0 - xi) * math.log2(d - 1)


def _linear(d: int, f: float) -> float:
    return d * math.log2(d - 1) / (d - 2) * (f - 1.0) + math.log2(d)


def eof_isotropic(d: int, fidelity: float) -> EofTerms:
    """Entanglement of formation (bits) of the isotropic state ``(d, F)``, ``d >= 3``.

    Three branches: zero for ``F <= 1/d``; ``R_{1,d-1}(F) = H2(xi) + (1 - xi)
    log2(d - 1)`` up to ``F = 4(d-1)/d**2``; linear in ``F`` above that. Every
    logarithm is base 2, the only choice under which the branches join
    continuously. On a boundary the lower (closed) interval wins, after
    checking that both neighbouring branches agree.
    """
    _check_d(d, minimum=3)
    _check_f(fidelity)
    f = float(fidelity)
    lo, hi = 1.0 / d, 4.0 * (d - 1) / d**2
    xi, h2, r = _middle(d, f)

    if f <= lo:
        if f == lo and abs(r) > BRANCH_TOL:
            raise AssertionError(f"branch mismatch at F = 1/d: R = {r!r}")
        return EofTerms(xi, h2, r, Branch.SEPARABLE, 0.0)
    if f <= hi:
        if f == hi:
            lin = _linear(d, f)
            if abs(lin - r) > BRANCH_TOL:
                raise AssertionError(f"branch mismatch at F = 4(d-1)/d^2: {r!r} vs {lin!r}")
        return EofTerms(xi, h2, r, Branch.MIDDLE, max(r, 0.0))
    return EofTerms(xi, h2, r, Branch.LINEAR, _linear(d, f))
