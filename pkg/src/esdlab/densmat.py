"""Dense density-matrix primitives.

Matrices are plain ``numpy`` complex arrays. The wrapper types below freeze
their arrays on construction so values can be shared between threads.

Index convention: composite basis states ``|a>|b>`` of a qudit pair map to the
0-based row ``a * d + b``. The maximally entangled components ``|j>|j>`` sit at
rows ``j * (d + 1)`` for ``j = 0 .. d-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10
    trace: float = 1e-10
    kraus: float = 1e-10
    psd: float = 1e-9


DEFAULT_TOL = Tolerances()


class DensityMatrixError(ValueError):
    """Raised when a matrix fails one or more density-matrix invariants.

    ``violations`` maps the invariant name (``"hermitian"``, ``"trace"``,
    ``"psd"``) to the measured residual.
    """

    def __init__(self, violations: dict[str, float]):
        self.violations = dict(violations)
        parts = ", ".join(f"{k} residual {v:.3e}" for k, v in self.violations.items())
        super().__init__(f"not a valid density matrix: {parts}")


class KrausError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def _square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class DensityMatrix:
    """A validated, immutable density matrix. Build it with :func:`validate_density`."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(_square(self.matrix)))

    @property
    def dim_total(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)


@dataclass(frozen=True)
class MaxEntangled:
    """``|Psi(d)> = d**-1/2 sum_j |j>|j>`` and its projector."""

    d: int
    vector: np.ndarray = field(repr=False)
    projector: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class KrausSet:
    """Operators of one channel, checked for ``sum K^dag K = I`` on construction."""

    operators: tuple[np.ndarray, ...]
    tol: float = DEFAULT_TOL.kraus

    def __post_init__(self):
        ops = tuple(_frozen(_square(k)) for k in self.operators)
        if not ops:
            raise KrausError("a Kraus set needs at least one operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise KrausError("Kraus operators must share one shape")
        object.__setattr__(self, "operators", ops)
        res = self.completeness_residual()
        if res > self.tol:
            raise KrausError(f"completeness sum K^dag K = I violated (residual {res:.3e})")

    @property
    def dim_total(self) -> int:
        return self.operators[0].shape[0]

    def completeness_residual(self) -> float:
        """max |sum K^dag K - I|."""
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(self.dim_total))))

    def unitality_residual(self) -> float:
        """max |sum K K^dag - I|.

        Some texts call this condition "trace preserving"; under the usual
        ``K rho K^dag`` convention it is unitality. Both are checked for the
        built-in dephasing sets, which are diagonal so the two coincide.
        """
        s = sum(k @ k.conj().T for k in self.operators)
        return float(np.max(np.abs(s - np.eye(self.dim_total))))

    def is_self_adjoint(self, tol: float = 0.0) -> bool:
        return all(np.max(np.abs(k - k.conj().T)) <= tol for k in self.operators)


def hermiticity_residual(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T)))


def min_eigenvalue(m, tol_herm: float = DEFAULT_TOL.herm) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Raises ``ValueError`` if ``m`` is not Hermitian within ``tol_herm``.
    The Hermitian part is diagonalised so tiny asymmetries do not leak into
    the spectrum.
    """
    m = _square(m)
    res = hermiticity_residual(m)
    if res > tol_herm:
        raise ValueError(f"matrix is not Hermitian (residual {res:.3e})")
    h = 0.5 * (m + m.conj().T)
    return float(np.linalg.eigvalsh(h)[0])


def validate_density(m, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity, returning a DensityMatrix.

    All violated invariants are collected into a single DensityMatrixError.
    """
    if isinstance(m, DensityMatrix):
        m = m.matrix
    m = _square(m)
    violations = {}
    herm = hermiticity_residual(m)
    if herm > tol.herm:
        violations["hermitian"] = herm
    tr = abs(complex(np.trace(m)) - 1.0)
    if tr > tol.trace:
        violations["trace"] = tr
    h = 0.5 * (m + m.conj().T)
    lam = float(np.linalg.eigvalsh(h)[0])
    if lam < -tol.psd:
        violations["psd"] = -lam
    if violations:
        raise DensityMatrixError(violations)
    return DensityMatrix(m)


def max_entangled(d: int) -> MaxEntangled:
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    vec = np.zeros(d * d, dtype=complex)
    vec[np.arange(d) * (d + 1)] = 1.0 / np.sqrt(d)
    proj = np.outer(vec, vec.conj())
    return MaxEntangled(d, _frozen(vec), _frozen(proj))


def apply_channel(rho, ks: KrausSet, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """Operator-sum map ``rho -> sum_mu K_mu^dag rho K_mu``.

    The adjoint sits on the left, matching the ground-referenced dephasing
    model this package reproduces. For self-adjoint operators (all built-in
    sets) this is the same map as ``sum K rho K^dag``.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else _square(rho)
    if m.shape[0] != ks.dim_total:
        raise ValueError(f"dimension mismatch: rho is {m.shape[0]}, channel is {ks.dim_total}")
    if ks.completeness_residual() > tol.kraus:
        raise KrausError("channel fails completeness")
    out = np.zeros_like(m, dtype=complex)
    for k in ks.operators:
        out += k.conj().T @ m @ k
    return validate_density(out, tol)


def apply_channel_conventional(rho, ks: KrausSet) -> np.ndarray:
    """``sum K rho K^dag`` without validation; used to cross-check conventions."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return sum(k @ m @ k.conj().T for k in ks.operators)


def fidelity_with_projector(rho, p: MaxEntangled, tol: float = DEFAULT_TOL.herm) -> float:
    """``tr(rho P)`` for the maximally entangled projector ``P``.

    Values within ``tol`` outside [0, 1] are clamped; anything further out
    raises ``ValueError``.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else _square(rho)
    if m.shape != p.projector.shape:
        raise ValueError(f"dimension mismatch: rho {m.shape} vs projector {p.projector.shape}")
    val = complex(np.einsum("ij,ji->", m, p.projector))
    if abs(val.imag) > tol:
        raise ValueError(f"fidelity has imaginary residual {val.imag:.3e}")
    f = val.real
    if f < -tol or f > 1.0 + tol:
        raise ValueError(f"fidelity {f!r} outside [0, 1]")
    return min(max(f, 0.0), 1.0)




def rho_array(m) -> np.ndarray:
    return m.matrix if isinstance(m, DensityMatrix) else np.asarray(m)


def partial_transpose(m, d: int) -> np.ndarray:
    """Transpose the second qudit of a ``d*d``-dimensional operator."""
    m = rho_array(m)
    return m.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)
