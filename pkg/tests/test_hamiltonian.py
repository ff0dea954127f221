import math

import numpy as np
import pytest

from bosehubbard.fock import (
    RankOneState,
    enumerate_basis,
    enumerate_two_component_basis,
    rank1_matrix_elements,
    rank1_to_vector,
)
from bosehubbard.hamiltonian import (
    build_model1_hamiltonian,
    build_model2_hamiltonian,
    build_model2_hamiltonian_full,
    build_projector_factor,
    build_quadratic_operator,
    build_spin_operators,
    model1_parts,
)
from bosehubbard.lattice import ModelOneSpec, ModelTwoSpec, build_standard_lattice

SQ2 = math.sqrt(2)


def test_single_site_pair_energy():
    spec = ModelOneSpec([[0.0]], [-1.0])
    H = build_model1_hamiltonian(spec, 2)
    assert H.to_dense() == pytest.approx([[-4.0]])


def test_two_site_single_particle():
    spec = ModelOneSpec([[0, 0.7], [0.7, 0]], [-1.0, -1.0])
    H = build_model1_hamiltonian(spec, 1)
    assert H.to_dense() == pytest.approx([[-1.0, -0.7], [-0.7, -1.0]])


def test_two_site_two_particles_matrix():
    spec = build_standard_lattice("chain", 2, 1.0, U=-1.0)
    H = build_model1_hamiltonian(spec, 2)
    assert H.basis.states.tolist() == [[2, 0], [1, 1], [0, 2]]
    expected = np.array(
        [[-4.0, -SQ2, 0.0], [-SQ2, -2.0, -SQ2], [0.0, -SQ2, -4.0]]
    )
    assert H.to_dense() == pytest.approx(expected)


def test_diagonal_hopping_contributes_number_term():
    spec = ModelOneSpec([[0.5]], [0.0])
    H = build_model1_hamiltonian(spec, 3)
    assert H.to_dense() == pytest.approx([[-1.5]])  # -t_ii * n


def test_model2_single_site_sectors():
    spec = ModelTwoSpec(np.zeros((1, 1), complex), [-1.0], [1.0])
    assert build_model2_hamiltonian(spec, 1, 1).to_dense() == pytest.approx([[-4.0]])
    assert build_model2_hamiltonian(spec, 2, 0).to_dense() == pytest.approx([[0.0]])


def test_model2_tensor_product_oracle():
    # (1,1) block of the L=2 chain equals kron of single-particle hops plus diagonal
    spec = build_standard_lattice("chain", 2, 1.0, U1=-1.0, U2=0.5)
    H = build_model2_hamiltonian(spec, 1, 1).to_dense()
    hop1 = np.array([[0, -1.0], [-1.0, 0]])
    oracle = np.kron(hop1, np.eye(2)) + np.kron(np.eye(2), hop1)
    # diagonal from occupations: same-site pair -4, split pair 2*(U1+U2)
    oracle += np.diag([-4.0, -1.0, -1.0, -4.0])
    assert H == pytest.approx(oracle)


def test_model2_complex_hopping_hermitian():
    tb = np.array([[0, 0.8 * np.exp(1j * 0.9)], [0.8 * np.exp(-1j * 0.9), 0]])
    spec = ModelTwoSpec(tb, [-1, -1], [1, 1])
    for nb, nc in [(2, 0), (1, 1), (0, 2)]:
        H = build_model2_hamiltonian(spec, nb, nc)
        assert H.hermiticity_defect() <= 1e-14


def test_every_built_hamiltonian_hermitian():
    rng = np.random.default_rng(0)
    for _ in range(5):
        L = int(rng.integers(2, 4))
        t = rng.standard_normal((L, L))
        t = 0.5 * (t + t.T)
        spec = ModelOneSpec(t, -rng.uniform(0.1, 2, L))
        H = build_model1_hamiltonian(spec, int(rng.integers(1, 4)))
        assert H.hermiticity_defect() <= 1e-14
        tb = rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))
        tb = 0.5 * (tb + tb.conj().T)
        spec2 = ModelTwoSpec(tb, -rng.uniform(0.1, 2, L), rng.uniform(0.1, 2, L))
        H2 = build_model2_hamiltonian(spec2, 1, 1)
        assert H2.hermiticity_defect() <= 1e-14


def test_sector_structure_is_block_diagonal():
    # applying H to any sector vector stays inside the sector by construction;
    # equivalently the full-space Hamiltonian never mixes (N_b, N_c) blocks
    spec = build_standard_lattice("chain", 2, 1.0, U1=-1.0, U2=0.5)
    Hf = build_model2_hamiltonian_full(spec, 2)
    fb = Hf.basis
    nb = fb.states[:, :2].sum(axis=1)
    M = np.abs(Hf.to_dense())
    for a in range(fb.size):
        for b in range(fb.size):
            if nb[a] != nb[b]:
                assert M[a, b] == 0


def test_spin_eigenvalues_single_site_pair():
    spec = ModelTwoSpec(np.zeros((1, 1), complex), [-1.0], [1.0])
    spin = build_spin_operators(spec, 2)
    basis = spin.s2.basis
    # states ordered (n_b, n_c): (2,0), (1,1), (0,2)
    s2 = spin.s2.to_dense()
    sz = spin.sz.to_dense()
    vec = np.zeros(3)
    vec[basis.index((1, 1))] = 1.0
    assert sz @ vec == pytest.approx(0.0 * vec)
    assert s2 @ vec == pytest.approx(2.0 * vec)  # one-site pair is spin 1
    vec2 = np.zeros(3)
    vec2[basis.index((2, 0))] = 1.0
    assert sz @ vec2 == pytest.approx(1.0 * vec2)
    assert s2 @ vec2 == pytest.approx(2.0 * vec2)


def test_two_site_singlet_annihilated_by_s2():
    spec = ModelTwoSpec(np.zeros((2, 2), complex), [-1.0, -1.0], [1.0, 1.0])
    spin = build_spin_operators(spec, 2)
    basis = spin.s2.basis
    vec = np.zeros(basis.size)
    vec[basis.index((1, 0, 0, 1))] = 1 / SQ2   # b1 c2
    vec[basis.index((0, 1, 1, 0))] = -1 / SQ2  # -b2 c1
    assert np.linalg.norm(spin.s2.matrix @ vec) <= 1e-12
    # dense diagonalization confirms a zero eigenvalue with this eigenvector
    w, V = np.linalg.eigh(spin.s2.to_dense())
    assert w[0] == pytest.approx(0.0, abs=1e-12)


def test_s2_matches_three_component_assembly():
    # ladder identity S-S+ + Sz(Sz+1) against Sx^2+Sy^2+Sz^2 built directly
    spec = ModelTwoSpec(np.zeros((2, 2), complex), [-1.0, -1.0], [1.0, 1.0])
    N = 3
    spin = build_spin_operators(spec, N)
    basis = spin.s2.basis
    L = 2
    plus = np.zeros((2 * L, 2 * L))
    for i in range(L):
        plus[i, L + i] = 1.0
    sp = build_quadratic_operator(plus, basis).to_dense()
    sm = sp.conj().T
    sz = spin.sz.to_dense()
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    direct = sx @ sx + np.real(sy @ sy) + sz @ sz
    assert np.allclose(spin.s2.to_dense(), direct, atol=1e-12)


def test_s2_commutes_with_real_hopping_hamiltonian():
    rng = np.random.default_rng(1)
    for L, N in [(2, 2), (2, 3), (3, 2)]:
        t = rng.standard_normal((L, L))
        t = 0.5 * (t + t.T)
        spec = ModelTwoSpec(t.astype(complex), -rng.uniform(0.1, 2, L), rng.uniform(0.1, 2, L))
        H = build_model2_hamiltonian_full(spec, N)
        s2 = build_spin_operators(spec, N).s2
        comm = H.matrix @ s2.matrix - s2.matrix @ H.matrix
        defect = 0.0 if comm.nnz == 0 else abs(comm.data).max()
        assert defect <= 1e-10


def test_hamiltonian_application_matches_rank1_contractions():
    # <phi^N| H |psi^N> via sparse matrix equals the closed-form sum
    rng = np.random.default_rng(2)
    L, N = 3, 4
    t = rng.standard_normal((L, L))
    t = 0.5 * (t + t.T)
    U = -rng.uniform(0.1, 2, L)
    spec = ModelOneSpec(t, U)
    H = build_model1_hamiltonian(spec, N)
    basis = H.basis
    for _ in range(8):
        phi = RankOneState(rng.standard_normal(L), N)
        psi = RankOneState(rng.standard_normal(L), N)
        want = np.vdot(rank1_to_vector(phi, basis).amplitudes,
                       H.matrix @ rank1_to_vector(psi, basis).amplitudes)
        got = 0.0
        for i in range(L):
            for j in range(L):
                if t[i, j] != 0:
                    got -= t[i, j] * rank1_matrix_elements(phi, psi, "hop", i, j)
            got += U[i] * (rank1_matrix_elements(phi, psi, "pair", i)
                           + rank1_matrix_elements(phi, psi, "number", i))
        assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


def test_projector_factor_two_site():
    spec = ModelOneSpec([[0, 1.0], [1.0, 0]], [0.0, 0.0])
    factor = build_projector_factor(spec, 1, 0.1)
    assert factor.operator.to_dense() == pytest.approx([[1.0, 0.1], [0.1, 1.0]])
    assert factor.nonnegative
    assert factor.irreducible


def test_projector_factor_flags_negative_hopping():
    spec = ModelOneSpec([[0, -1.0], [-1.0, 0]], [0.0, 0.0])
    factor = build_projector_factor(spec, 1, 0.1)
    assert not factor.nonnegative
    assert factor.min_entry == pytest.approx(-0.1)


def test_projector_factor_odd_sector_unique_ground():
    spec = ModelOneSpec([[0, 1.0], [1.0, 0]], [1.0, 1.0])
    factor = build_projector_factor(spec, 3, 0.01)
    assert factor.nonnegative and factor.irreducible
    w = np.linalg.eigvalsh(build_model1_hamiltonian(spec, 3).to_dense())
    assert w[1] - w[0] > 1e-8


def test_projector_factor_disconnected_pattern_not_irreducible():
    spec = ModelOneSpec(np.zeros((2, 2)), [-1.0, -1.0])
    factor = build_projector_factor(spec, 1, 0.1)
    assert not factor.irreducible


def test_coo_export_round_trips(tmp_path):
    spec = build_standard_lattice("chain", 2, 1.0, U=-1.0)
    H = build_model1_hamiltonian(spec, 2)
    path = tmp_path / "h.coo"
    H.export_coo(path)
    rebuilt = np.zeros((H.dim, H.dim), dtype=complex)
    for line in path.read_text().splitlines():
        r, c, re, im = line.split()
        rebuilt[int(r), int(c)] = float(re) + 1j * float(im)
    assert np.allclose(rebuilt, H.to_dense())


def test_nnz_cap_enforced():
    spec = build_standard_lattice("complete", 4, 1.0, U=-1.0)
    with pytest.raises(ValueError):
        build_model1_hamiltonian(spec, 6, cap=100)
