import numpy as np
import pytest
from hypothesis import given, strategies as st

from support import reference_expm

from phinv import (
    DimensionError,
    DomainError,
    ShapeError,
    StructureError,
    adjoint,
    apply,
    basis_state,
    build_operator_set,
    cached_operator_set,
    commutator,
    diagonal_power,
    frobenius_distance,
    interior_norm,
    ladder_exp,
    nilpotent_exp,
    tail_support,
)


def test_minimum_dimension_enforced():
    with pytest.raises(DimensionError):
        build_operator_set(3)
    ops = build_operator_set(4)
    assert ops.a.shape == (4, 4)


def test_number_operator_diagonal():
    ops = build_operator_set(4)
    num = ops.a_dag @ ops.a
    assert np.allclose(num, np.diag([0.0, 1.0, 2.0, 3.0]), atol=1e-15)


def test_k_zero_diagonal():
    ops = build_operator_set(4)
    assert np.allclose(ops.k_zero, np.diag([0.25, 0.75, 1.25, 1.75]), atol=1e-15)


def test_two_quantum_lowering_amplitudes():
    ops = build_operator_set(4)
    asq = ops.a @ ops.a
    assert abs(asq[0, 2] - np.sqrt(2)) < 1e-15
    assert abs(asq[1, 3] - np.sqrt(6)) < 1e-15


def test_canonical_commutator_interior(ops64):
    dev = commutator(ops64.a, ops64.a_dag) - np.eye(64)
    assert frobenius_distance(dev, np.zeros((64, 64)), exclude_top=1) <= 1e-12
    xp = commutator(ops64.x, ops64.p)
    assert frobenius_distance(xp, 1j * np.eye(64), exclude_top=1) <= 1e-12


def test_k0_ladder_commutators_full_matrix(ops64):
    assert np.linalg.norm(commutator(ops64.k_zero, ops64.k_plus) - ops64.k_plus) <= 1e-12
    assert np.linalg.norm(commutator(ops64.k_zero, ops64.k_minus) + ops64.k_minus) <= 1e-12


def test_ladder_commutator_interior(ops64):
    dev = commutator(ops64.k_plus, ops64.k_minus) + 2 * ops64.k_zero
    assert frobenius_distance(dev, np.zeros((64, 64)), exclude_top=2) <= 1e-12
    # the deviation is real and confined to the top two levels
    assert np.linalg.norm(dev[:-2, :-2]) <= 1e-12


def test_nilpotent_exp_zero_argument(ops64):
    out = nilpotent_exp(np.zeros((64, 64), dtype=complex), 2)
    assert np.array_equal(out, np.eye(64))


def test_nilpotent_exp_truncates_exactly_small_dim():
    ops = build_operator_set(4)
    theta = 0.37
    out = nilpotent_exp(theta * ops.k_minus, 2)
    # a^4 vanishes identically on four levels, so the series stops after
    # the linear term
    assert np.allclose(out, np.eye(4) + theta * ops.k_minus, atol=1e-15)


def test_nilpotent_exp_group_inverse():
    # at 64 levels the exponential factors reach 1e8 scales for |theta|
    # near 1, so the absolute statement holds on 16 levels and for small
    # theta, and the factor-normalized statement holds everywhere
    ops16 = build_operator_set(16)
    for theta in (-1.0, -0.4, 0.25, 1.0):
        prod = nilpotent_exp(theta * ops16.k_plus, 2) @ nilpotent_exp(-theta * ops16.k_plus, 2)
        assert np.linalg.norm(prod - np.eye(16)) <= 1e-13
    ops64 = cached_operator_set(64)
    for theta in (-0.1, 0.1):
        prod = nilpotent_exp(theta * ops64.k_plus, 2) @ nilpotent_exp(-theta * ops64.k_plus, 2)
        assert np.linalg.norm(prod - np.eye(64)) <= 1e-13
    for theta in (-1.0, -0.4, 0.25, 1.0):
        a = nilpotent_exp(theta * ops64.k_plus, 2)
        b = nilpotent_exp(-theta * ops64.k_plus, 2)
        res = np.linalg.norm(a @ b - np.eye(64))
        assert res / (np.linalg.norm(a) * np.linalg.norm(b)) <= 1e-15


def test_nilpotent_exp_rejects_nonbanded(ops64):
    dense = np.ones((8, 8), dtype=complex)
    with pytest.raises(StructureError):
        nilpotent_exp(dense, 2)
    with pytest.raises(StructureError):
        nilpotent_exp(ops64.k_plus + ops64.k_minus, 2)


def test_nilpotent_exp_matches_reference_exponential(ops64):
    # banded arguments of modest norm: series and scaling-squaring agree
    for mat in (0.06 * ops64.k_plus, 0.06 * ops64.k_minus, -0.03j * ops64.k_plus):
        assert 0.5 < np.linalg.norm(mat, 2) <= 2.0
        dev = np.linalg.norm(nilpotent_exp(mat, 2) - reference_expm(mat))
        assert dev <= 1e-12


def test_diagonal_power_examples():
    k0 = np.diag([0.25, 0.75])
    out = diagonal_power(np.exp(2.0), k0)
    assert np.allclose(out, np.diag([np.exp(0.5), np.exp(1.5)]), rtol=1e-14)
    with pytest.raises(DomainError):
        diagonal_power(0.0, k0)
    with pytest.raises(DomainError):
        diagonal_power(-1.0, k0)
    with pytest.raises(StructureError):
        diagonal_power(2.0, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_ladder_exp_matches_series(ops64):
    ops16 = build_operator_set(16)
    for tau in (0.3, -0.7, 1.2):
        for dim, ops in ((16, ops16), (64, ops64)):
            for raising in (True, False):
                gen = tau * (ops.k_plus if raising else ops.k_minus)
                ref = nilpotent_exp(gen, 2)
                fast = ladder_exp(tau, dim, raising)
                rel = np.linalg.norm(fast - ref) / max(1.0, np.linalg.norm(ref))
                assert rel <= 1e-12


def test_ladder_exp_transpose_symmetry():
    up = ladder_exp(0.45, 32, True)
    down = ladder_exp(0.45, 32, False)
    assert np.array_equal(up, down.T)


def test_interior_norm_excludes_top_levels():
    a = np.zeros((10, 10))
    a[9, 9] = 1e6
    a[7, 2] = 1e6
    assert interior_norm(a, exclude_top=3) == 0.0
    assert interior_norm(a, exclude_top=2) == 1e6


def test_frobenius_distance_exclusion():
    a = np.eye(6)
    b = np.eye(6)
    b[5, 5] = 7.0
    assert frobenius_distance(a, b, exclude_top=1) == 0.0
    assert frobenius_distance(a, b) == 6.0


def test_tail_support_fractions():
    v = basis_state(16, 15)
    assert tail_support(v) == pytest.approx(1.0)
    v = basis_state(16, 0)
    assert tail_support(v) == 0.0
    v = np.zeros(16)
    v[0] = 1.0
    v[12] = 1.0
    assert tail_support(v) == pytest.approx(0.5)


def test_basis_state_and_apply():
    v = basis_state(8, 3)
    assert v.shape == (8,)
    assert v[3] == 1.0
    assert np.linalg.norm(v) == 1.0
    ops = build_operator_set(8)
    w = apply(ops.a_dag, v)
    assert abs(w[4] - 2.0) < 1e-15
    with pytest.raises(ShapeError):
        basis_state(8, 9)
    with pytest.raises(ShapeError):
        apply(ops.a, basis_state(16, 0))


@given(
    st.integers(min_value=0, max_value=5),
    st.integers(min_value=0, max_value=5),
)
def test_commutator_antisymmetry(i, j):
    rng = np.random.default_rng(17 * i + j)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    b = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    assert np.allclose(commutator(a, b), -commutator(b, a), atol=1e-12)


def test_adjoint_involution(ops64):
    assert np.array_equal(adjoint(adjoint(ops64.k_plus)), ops64.k_plus)
    assert np.array_equal(adjoint(ops64.k_plus), ops64.k_minus)
    assert np.array_equal(adjoint(ops64.a), ops64.a_dag)


def test_cached_operator_set_identity():
    assert cached_operator_set(32) is cached_operator_set(32)
