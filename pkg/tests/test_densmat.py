import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esdlab.densmat import (
    DensityMatrix,
    DensityMatrixError,
    KrausError,
    KrausSet,
    apply_channel,
    apply_channel_conventional,
    fidelity_with_projector,
    max_entangled,
    min_eigenvalue,
    partial_transpose,
    validate_density,
)
from esdlab.isotropic import make_isotropic


def test_maximally_mixed_is_valid():
    rho = validate_density(np.eye(9) / 9)
    assert isinstance(rho, DensityMatrix)
    assert rho.dim_total == 9


def test_pure_projector_is_valid():
    p = max_entangled(3).projector
    rho = validate_density(p)
    eig = np.linalg.eigvalsh(rho.matrix)
    np.testing.assert_allclose(eig, [0] * 8 + [1], atol=1e-14)


def test_hermiticity_violation_reports_residual():
    m = np.eye(9, dtype=complex) / 9
    m[1, 2] = 0.5
    with pytest.raises(DensityMatrixError) as info:
        validate_density(m)
    assert info.value.violations["hermitian"] == pytest.approx(0.5)


def test_all_violations_listed():
    m = np.diag([2.0, -0.5, 0.0, 0.0]).astype(complex)
    m[0, 1] = 1.0
    with pytest.raises(DensityMatrixError) as info:
        validate_density(m)
    assert set(info.value.violations) == {"hermitian", "trace", "psd"}
    assert info.value.violations["trace"] == pytest.approx(0.5)


def test_non_square_rejected():
    with pytest.raises(ValueError):
        validate_density(np.zeros((2, 3)))


def test_density_matrix_is_read_only():
    src = np.eye(4) / 4
    rho = validate_density(src)
    src[0, 0] = 7.0
    assert rho.matrix[0, 0] == 0.25
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0


def test_bell_state_vector():
    v = max_entangled(2).vector
    np.testing.assert_allclose(v, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)], atol=0)


def test_max_entangled_d3_positions():
    v = max_entangled(3).vector
    expected = np.zeros(9)
    for j in range(1, 4):  # 1-based ket label j sits at (j-1)d + (j-1)
        expected[(j - 1) * 3 + (j - 1)] = 1 / np.sqrt(3)
    np.testing.assert_array_equal(np.flatnonzero(v), [0, 4, 8])
    np.testing.assert_allclose(v, expected, atol=1e-16)


@pytest.mark.parametrize("d", range(2, 9))
def test_projector_identities(d):
    p = max_entangled(d).projector
    assert np.trace(p).real == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(p @ p, p, atol=1e-14)


def test_max_entangled_rejects_small_d():
    with pytest.raises(ValueError):
        max_entangled(1)


def test_identity_channel():
    rho = make_isotropic(3, 0.7)
    out = apply_channel(rho, KrausSet((np.eye(9),)))
    np.testing.assert_array_equal(out.matrix, rho.matrix)


def test_complete_dephasing_of_projector():
    # phase-kill on both qudits: projectors onto each composite basis state
    ops = []
    for k in range(9):
        e = np.zeros((9, 9))
        e[k, k] = 1.0
        ops.append(e)
    out = apply_channel(max_entangled(3).projector, KrausSet(tuple(ops))).matrix
    expected = np.zeros((9, 9))
    expected[[0, 4, 8], [0, 4, 8]] = 1 / 3
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_channel_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_channel(np.eye(4) / 4, KrausSet((np.eye(9),)))


def test_incomplete_kraus_rejected():
    with pytest.raises(KrausError):
        KrausSet((0.5 * np.eye(4),))
    with pytest.raises(KrausError):
        KrausSet((np.eye(4), np.eye(3)))


def test_adjoint_convention_matters_only_for_non_self_adjoint_sets():
    # amplitude damping: not self-adjoint, so the two orderings differ
    g = 0.3
    k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]])
    k1 = np.array([[0, np.sqrt(g)], [0, 0]])
    ks = KrausSet((k0, k1))
    assert not ks.is_self_adjoint()
    rho = np.array([[0.2, 0.1], [0.1, 0.8]])
    with pytest.raises(DensityMatrixError):
        apply_channel(rho, ks)  # K^dag rho K is not trace preserving here
    assert np.trace(apply_channel_conventional(rho, ks)).real == pytest.approx(1.0)


def test_fidelity_examples():
    p3 = max_entangled(3)
    assert fidelity_with_projector(np.eye(9) / 9, p3) == pytest.approx(1 / 9, abs=1e-15)
    assert fidelity_with_projector(p3.projector, p3) == pytest.approx(1.0, abs=1e-15)
    assert fidelity_with_projector(make_isotropic(3, 0.7), p3) == pytest.approx(0.7, abs=1e-15)


def test_fidelity_errors():
    p3 = max_entangled(3)
    with pytest.raises(ValueError):
        fidelity_with_projector(np.eye(4) / 4, p3)
    with pytest.raises(ValueError):
        fidelity_with_projector(2 * p3.projector, p3)


def test_min_eigenvalue_examples():
    assert min_eigenvalue(np.eye(9) / 9) == pytest.approx(1 / 9, abs=1e-15)
    assert min_eigenvalue(max_entangled(3).projector) == pytest.approx(0.0, abs=1e-14)
    assert min_eigenvalue(make_isotropic(3, 0.5).matrix) == pytest.approx(0.0625, abs=1e-14)
    with pytest.raises(ValueError):
        min_eigenvalue(np.array([[0, 1], [0, 0]]))


def test_min_eigenvalue_against_characteristic_polynomial():
    m = np.array([[2.0, 1.0j], [-1.0j, 3.0]])
    # eigenvalues of [[a, b], [b*, c]]: (a + c)/2 -+ sqrt(((a - c)/2)^2 + |b|^2)
    expected = 2.5 - np.sqrt(0.25 + 1.0)
    assert min_eigenvalue(m) == pytest.approx(expected, abs=1e-14)


def test_partial_transpose_of_bell_projector_is_half_swap():
    pt = partial_transpose(max_entangled(2).projector, 2)
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]) / 2
    np.testing.assert_allclose(pt, swap, atol=1e-15)


@st.composite
def random_states(draw):
    d = draw(st.integers(2, 4))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(d * d, d * d)) + 1j * rng.normal(size=(d * d, d * d))
    m = g @ g.conj().T
    return d, m / np.trace(m).real


@settings(max_examples=40, deadline=None)
@given(random_states())
def test_random_states_validate(case):
    d, m = case
    rho = validate_density(m)
    assert 0.0 <= fidelity_with_projector(rho, max_entangled(d)) <= 1.0
