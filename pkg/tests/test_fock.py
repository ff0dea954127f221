import math

import numpy as np
import pytest
import scipy.linalg

from bosehubbard.fock import (
    RankOneState,
    apply_quadratic_exponential,
    enumerate_basis,
    enumerate_two_component_basis,
    matrix_exponential,
    overlap_rank1,
    rank1_matrix_elements,
    rank1_to_vector,
    reflection_state,
)
from bosehubbard.hamiltonian import build_quadratic_operator


def brute_force_expand(psi, N, basis):
    """Independent oracle: expand (sum_i psi_i a_i^+)^N |0> term by term.

    Walks all i_1..i_N index strings and accumulates sqrt-factorial ladder
    factors, never using the multinomial closed form under test.
    """
    amp = np.zeros(basis.size, dtype=complex)
    m = len(psi)

    def rec(k, occ, coeff):
        if k == N:
            amp[basis.index_of[tuple(occ)]] += coeff
            return
        for i in range(m):
            occ[i] += 1
            rec(k + 1, occ, coeff * psi[i] * math.sqrt(occ[i]))
            occ[i] -= 1

    rec(0, [0] * m, 1.0 + 0.0j)
    return amp


def test_enumerate_basis_two_modes_two_particles():
    b = enumerate_basis(2, 2)
    assert b.states.tolist() == [[2, 0], [1, 1], [0, 2]]
    assert b.size == 3
    assert b.index((1, 1)) == 1


def test_enumerate_basis_single_mode():
    b = enumerate_basis(1, 5)
    assert b.states.tolist() == [[5]]
    assert b.size == 1


def test_enumerate_basis_size_is_binomial():
    b = enumerate_basis(4, 4)
    assert b.size == 35 == math.comb(7, 3)
    # duplicate-free and complete
    assert len({tuple(s) for s in b.states}) == 35
    assert all(s.sum() == 4 for s in b.states)


def test_enumerate_basis_ordering_descending():
    b = enumerate_basis(3, 3)
    rows = [tuple(r) for r in b.states]
    assert rows == sorted(rows, reverse=True)


def test_enumerate_basis_cap():
    with pytest.raises(ValueError):
        enumerate_basis(30, 30, cap=10**6)


def test_two_component_basis_blocks():
    b = enumerate_two_component_basis(2, 1, 1)
    assert b.size == 4
    assert all(s[:2].sum() == 1 and s[2:].sum() == 1 for s in b.states)
    rows = [tuple(r) for r in b.states]
    assert rows == sorted(rows, reverse=True)


def test_rank1_single_mode_concentration():
    b = enumerate_basis(2, 2)
    v = rank1_to_vector(RankOneState([1.0, 0.0], 2), b)
    assert v.amplitudes == pytest.approx([math.sqrt(2), 0.0, 0.0])
    assert v.norm() ** 2 == pytest.approx(2.0)


def test_rank1_uniform_orbital_amplitudes():
    # brute-force expansion of (a1+ + a2+)^2 |0> gives (sqrt2, 2, sqrt2)
    b = enumerate_basis(2, 2)
    oracle = brute_force_expand([1.0, 1.0], 2, b)
    assert oracle == pytest.approx([math.sqrt(2), 2.0, math.sqrt(2)])
    v = rank1_to_vector(RankOneState([1.0, 1.0], 2), b)
    assert v.amplitudes == pytest.approx(oracle)
    assert v.norm() ** 2 == pytest.approx(8.0)  # 2! * (psi.psi)^2


def test_rank1_zero_orbital_gives_zero_vector():
    b = enumerate_basis(3, 2)
    v = rank1_to_vector(RankOneState([0.0, 0.0, 0.0], 2), b)
    assert np.all(v.amplitudes == 0)


def test_rank1_dimension_mismatch_rejected():
    b = enumerate_basis(2, 2)
    with pytest.raises(ValueError):
        rank1_to_vector(RankOneState([1.0, 0.0, 0.0], 2), b)
    with pytest.raises(ValueError):
        rank1_to_vector(RankOneState([1.0, 0.0], 3), b)


def test_rank1_matches_brute_force_on_random_orbitals():
    rng = np.random.default_rng(1)
    for m, N in [(2, 3), (3, 2), (3, 4), (4, 3)]:
        b = enumerate_basis(m, N)
        psi = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        got = rank1_to_vector(RankOneState(psi, N), b).amplitudes
        want = brute_force_expand(psi, N, b)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


def test_overlap_orthogonal_modes():
    assert overlap_rank1(RankOneState([1, 0], 2), RankOneState([0, 1], 2)) == 0


def test_overlap_matches_self_inner_product():
    s = RankOneState([1.0, 1.0], 2)
    assert overlap_rank1(s, s) == pytest.approx(8.0)


def test_overlap_mixed_orbitals():
    got = overlap_rank1(RankOneState([1.0, 0.0], 2), RankOneState([1.0, 1.0], 2))
    # basis-contraction oracle
    b = enumerate_basis(2, 2)
    v1 = rank1_to_vector(RankOneState([1.0, 0.0], 2), b)
    v2 = rank1_to_vector(RankOneState([1.0, 1.0], 2), b)
    assert got == pytest.approx(v1.inner(v2)) == pytest.approx(2.0)


def test_overlap_mismatch_rejected():
    with pytest.raises(ValueError):
        overlap_rank1(RankOneState([1, 0], 2), RankOneState([1, 0], 4))
    with pytest.raises(ValueError):
        overlap_rank1(RankOneState([1, 0], 2), RankOneState([1, 0, 0], 2))


def test_overlap_agrees_with_contraction_randomized():
    rng = np.random.default_rng(2)
    for _ in range(60):
        m = int(rng.integers(1, 5))
        N = int(rng.integers(0, 7))
        b = enumerate_basis(m, N)
        p1 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        p2 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        s1, s2 = RankOneState(p1, N), RankOneState(p2, N)
        got = overlap_rank1(s1, s2)
        want = rank1_to_vector(s1, b).inner(rank1_to_vector(s2, b))
        assert abs(got - want) <= 1e-10 * max(abs(want), 1.0)


def test_real_even_overlaps_nonnegative():
    rng = np.random.default_rng(3)
    for _ in range(200):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(1, 4))
        s1 = RankOneState(rng.standard_normal(m), 2 * n)
        s2 = RankOneState(rng.standard_normal(m), 2 * n)
        assert overlap_rank1(s1, s2) >= 0


def test_reflection_even_overlaps_real_nonnegative():
    rng = np.random.default_rng(4)
    for _ in range(200):
        L = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        s1 = reflection_state(rng.standard_normal(L) + 1j * rng.standard_normal(L), 2 * n)
        s2 = reflection_state(rng.standard_normal(L) + 1j * rng.standard_normal(L), 2 * n)
        o = overlap_rank1(s1, s2)
        assert abs(o.imag) <= 1e-12 * max(abs(o), 1.0)
        assert o.real >= 0


def test_reflection_structure_flag():
    s = reflection_state([1 + 2j, 0.5], 2)
    assert s.is_reflection_structured()
    assert not RankOneState([1 + 2j, 0.5], 2).is_reflection_structured()
    assert not RankOneState([1j, 1j], 2).is_reflection_structured()


def test_matrix_exponential_zero_and_diagonal():
    assert np.array_equal(matrix_exponential(np.zeros((3, 3))), np.eye(3))
    d = np.diag([0.3, -1.2, 2.0])
    assert np.allclose(matrix_exponential(d), np.diag(np.exp([0.3, -1.2, 2.0])), rtol=1e-14)


def test_matrix_exponential_hermitian_matches_eigendecomposition():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    H = 0.5 * (A + A.conj().T)
    w, V = np.linalg.eigh(H)
    want = (V * np.exp(w)) @ V.conj().T
    got = matrix_exponential(H)
    assert np.linalg.norm(got - want) <= 1e-12 * np.linalg.norm(want)


def test_matrix_exponential_antihermitian_is_unitary():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    K = 0.5 * (A - A.conj().T)
    U = matrix_exponential(K)
    assert np.allclose(U @ U.conj().T, np.eye(5), atol=1e-12)
    assert np.allclose(U, scipy.linalg.expm(K), atol=1e-12)


def test_matrix_exponential_general_matches_scipy():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((5, 5))
    assert np.allclose(matrix_exponential(A), scipy.linalg.expm(A), rtol=1e-12, atol=1e-12)


def test_matrix_exponential_real_input_stays_real():
    rng = np.random.default_rng(8)
    A = rng.standard_normal((4, 4))
    S = 0.5 * (A + A.T)
    out = matrix_exponential(S)
    assert not np.iscomplexobj(out)


def test_matrix_exponential_rejects_bad_input():
    with pytest.raises(ValueError):
        matrix_exponential(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        matrix_exponential(np.array([[np.inf, 0], [0, 0]]))


def test_quadratic_exponential_trivial_cases():
    s = RankOneState([1.0, 1.0], 2)
    out = apply_quadratic_exponential(np.zeros((2, 2)), s)
    assert np.allclose(out.psi, s.psi)
    out = apply_quadratic_exponential(np.diag([math.log(2), 0.0]), s)
    assert np.allclose(out.psi, [2.0, 1.0])


def test_quadratic_exponential_matches_occupation_oracle():
    rng = np.random.default_rng(9)
    for _ in range(20):
        m, N = 2, 2
        b = enumerate_basis(m, N)
        T = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        psi = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        state = RankOneState(psi, N)
        direct = rank1_to_vector(apply_quadratic_exponential(T, state), b).amplitudes
        big = scipy.linalg.expm(build_quadratic_operator(T, b).to_dense())
        oracle = big @ rank1_to_vector(state, b).amplitudes
        assert np.linalg.norm(direct - oracle) <= 1e-10 * np.linalg.norm(oracle)


def occupation_matrix_element(bra, ket, op, i, j, basis):
    """Sparse-operator oracle for the closed-form matrix elements."""
    m = basis.mode_count
    bv = rank1_to_vector(bra, basis).amplitudes
    kv = rank1_to_vector(ket, basis).amplitudes
    states = basis.states
    if op == "hop":
        C = np.zeros((m, m))
        C[i, j] = 1.0
        mat = build_quadratic_operator(C, basis).matrix
        return np.vdot(bv, mat @ kv)
    if op == "number":
        return np.vdot(bv, states[:, i] * kv)
    if op == "pair":
        return np.vdot(bv, states[:, i] * (states[:, i] - 1) * kv)
    if op == "nn":
        return np.vdot(bv, states[:, i] * states[:, j] * kv)
    raise ValueError(op)


def test_matrix_elements_single_particle_hop():
    phi = RankOneState([0.3, 0.7, -0.2], 1)
    psi = RankOneState([1.0, -0.5, 0.4], 1)
    got = rank1_matrix_elements(phi, psi, "hop", 1, 2)
    assert got == pytest.approx(0.7 * 0.4)


def test_matrix_elements_number_on_condensed_pair():
    s = RankOneState([1.0, 0.0], 2)
    assert rank1_matrix_elements(s, s, "number", 0) == pytest.approx(4.0)
    # direct ladder check: <(a+)^2 0| n |(a+)^2 0> = 2 * || (a+)^2|0> ||^2 = 2*2


def test_matrix_elements_pair_requires_two_particles():
    s = RankOneState([1.0, 0.0], 1)
    with pytest.raises(ValueError):
        rank1_matrix_elements(s, s, "pair", 0)


def test_matrix_elements_match_occupation_oracle():
    rng = np.random.default_rng(10)
    b = enumerate_basis(3, 4)
    for _ in range(12):
        phi = RankOneState(rng.standard_normal(3), 4)
        psi = RankOneState(rng.standard_normal(3), 4)
        for op, i, j in [("hop", 0, 2), ("hop", 1, 1), ("number", 2, None),
                         ("pair", 1, None), ("nn", 0, 2)]:
            got = rank1_matrix_elements(phi, psi, op, i, j)
            want = occupation_matrix_element(phi, psi, op, i, j, b)
            assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


def test_matrix_elements_complex_orbitals_match_oracle():
    rng = np.random.default_rng(11)
    b = enumerate_basis(3, 3)
    phi = RankOneState(rng.standard_normal(3) + 1j * rng.standard_normal(3), 3)
    psi = RankOneState(rng.standard_normal(3) + 1j * rng.standard_normal(3), 3)
    for op, i, j in [("hop", 0, 1), ("number", 1, None), ("pair", 0, None), ("nn", 1, 2)]:
        got = rank1_matrix_elements(phi, psi, op, i, j)
        want = occupation_matrix_element(phi, psi, op, i, j, b)
        assert abs(got - want) <= 1e-10 * max(1.0, abs(want))
