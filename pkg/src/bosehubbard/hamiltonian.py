"""Sparse sector Hamiltonians, spin operators, and the projector factor.

Assembly follows the ladder rules on occupation vectors,
a_j|n> = sqrt(n_j)|n - e_j> and a_i^+|n> = sqrt(n_i + 1)|n + e_i>;
quartic interaction terms are diagonal and evaluated directly from the
occupation numbers.  Every operator is built inside one fixed-N sector
(or fixed (N_b, N_c) block), so particle number is conserved by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import connected_components

from .fock import OccupationBasis, enumerate_basis, enumerate_two_component_basis
from .lattice import ModelOneSpec, ModelTwoSpec

__all__ = [
    "DEFAULT_NNZ_CAP",
    "SparseOperator",
    "SpinOperators",
    "ProjectorFactor",
    "build_quadratic_operator",
    "diagonal_operator",
    "build_model1_hamiltonian",
    "model1_parts",
    "build_model2_hamiltonian",
    "build_model2_hamiltonian_full",
    "model2_parts",
    "build_spin_operators",
    "build_projector_factor",
]

DEFAULT_NNZ_CAP = 10**7


class SparseOperator:
    """A sparse matrix tied to the occupation basis it acts on."""

    def __init__(self, basis: OccupationBasis, matrix):
        mat = scipy.sparse.csr_matrix(matrix)
        if mat.shape != (basis.size, basis.size):
            raise ValueError(f"matrix must be {basis.size} x {basis.size}")
        self.basis = basis
        self.matrix = mat

    @property
    def dim(self) -> int:
        return self.basis.size

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def hermiticity_defect(self) -> float:
        """max |H - H^dag| over all entries."""
        d = self.matrix - self.matrix.conj().T
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())

    def export_coo(self, path) -> None:
        """Write 'row col re im' lines for external cross-checks."""
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                z = complex(v)
                fh.write(f"{r} {c} {z.real!r} {z.imag!r}\n")

    def __repr__(self):
        return f"SparseOperator(dim={self.dim}, nnz={self.matrix.nnz})"


@dataclass(frozen=True)
class SpinOperators:
    sz: SparseOperator
    s2: SparseOperator


@dataclass(frozen=True)
class ProjectorFactor:
    """1 - dtau*H together with its Perron-Frobenius-relevant flags."""

    operator: SparseOperator
    nonnegative: bool
    irreducible: bool
    min_entry: float


def build_quadratic_operator(coeff, basis: OccupationBasis, cap=DEFAULT_NNZ_CAP) -> SparseOperator:
    """Assemble sum_ij coeff[i,j] a_i^+ a_j over the sector basis."""
    C = np.asarray(coeff)
    m = basis.mode_count
    if C.shape != (m, m):
        raise ValueError(f"coefficient matrix must be {m} x {m}")
    states = basis.states
    dim = basis.size
    off_pairs = [(i, j) for i, j in zip(*np.nonzero(C)) if i != j]
    if dim * (len(off_pairs) + 1) > cap:
        raise ValueError("operator would exceed the nonzero cap")
    dtype = complex if np.iscomplexobj(C) else float

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [states @ np.diag(C).astype(dtype)]
    for i, j in off_pairs:
        src = np.nonzero(states[:, j] > 0)[0]
        if src.size == 0:
            continue
        amp = C[i, j] * np.sqrt(states[src, j] * (states[src, i] + 1.0))
        tgt = np.empty(src.size, dtype=np.int64)
        for k, idx in enumerate(src):
            occ = states[idx].copy()
            occ[j] -= 1
            occ[i] += 1
            tgt[k] = basis.index_of[tuple(occ)]
        rows.append(tgt)
        cols.append(src)
        vals.append(amp.astype(dtype))
    mat = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
        dtype=dtype,
    ).tocsr()
    mat.eliminate_zeros()
    return SparseOperator(basis, mat)


def diagonal_operator(values, basis: OccupationBasis) -> SparseOperator:
    vals = np.asarray(values)
    if vals.shape != (basis.size,):
        raise ValueError(f"need {basis.size} diagonal values")
    return SparseOperator(basis, scipy.sparse.diags(vals).tocsr())


def model1_parts(spec: ModelOneSpec, N, cap=DEFAULT_NNZ_CAP):
    """Hopping and interaction parts (H0, HU) over the N-particle sector."""
    basis = enumerate_basis(spec.L, N)
    h0 = build_quadratic_operator(-spec.hopping, basis, cap=cap)
    diag = (basis.states.astype(float) ** 2) @ spec.interactions
    hu = diagonal_operator(diag, basis)
    return h0, hu


def build_model1_hamiltonian(spec: ModelOneSpec, N, cap=DEFAULT_NNZ_CAP) -> SparseOperator:
    """Full single-component Hamiltonian on the N-particle sector."""
    h0, hu = model1_parts(spec, N, cap=cap)
    return SparseOperator(h0.basis, h0.matrix + hu.matrix)


def _model2_parts_on(spec: ModelTwoSpec, basis: OccupationBasis, cap=DEFAULT_NNZ_CAP):
    L = spec.L
    T = np.zeros((2 * L, 2 * L), dtype=complex)
    T[:L, :L] = spec.hopping_b
    T[L:, L:] = spec.hopping_c
    h0 = build_quadratic_operator(-T, basis, cap=cap)
    nb = basis.states[:, :L].astype(float)
    nc = basis.states[:, L:].astype(float)
    diag = ((nb + nc) ** 2) @ spec.interactions_1 + ((nb - nc) ** 2) @ spec.interactions_2
    hu = diagonal_operator(diag, basis)
    return h0, hu


def model2_parts(spec: ModelTwoSpec, N_b, N_c, cap=DEFAULT_NNZ_CAP):
    basis = enumerate_two_component_basis(spec.L, N_b, N_c)
    return _model2_parts_on(spec, basis, cap=cap)


def build_model2_hamiltonian(spec: ModelTwoSpec, N_b, N_c, cap=DEFAULT_NNZ_CAP) -> SparseOperator:
    """Two-component Hamiltonian on the fixed (N_b, N_c) block."""
    h0, hu = model2_parts(spec, N_b, N_c, cap=cap)
    return SparseOperator(h0.basis, h0.matrix + hu.matrix)


def build_model2_hamiltonian_full(spec: ModelTwoSpec, N, cap=DEFAULT_NNZ_CAP) -> SparseOperator:
    """Two-component Hamiltonian on the whole N-particle space.

    The basis is the plain 2L-mode enumeration, i.e. the direct sum of all
    (N_b, N_c) blocks with N_b + N_c = N; useful for commutator checks
    against operators that connect blocks.
    """
    basis = enumerate_basis(2 * spec.L, N)
    h0, hu = _model2_parts_on(spec, basis, cap=cap)
    return SparseOperator(basis, h0.matrix + hu.matrix)


def build_spin_operators(spec: ModelTwoSpec, N, cap=DEFAULT_NNZ_CAP) -> SpinOperators:
    """Total S^z and S^2 over the full N-particle space.

    S^+ = sum_i b_i^+ c_i raises S^z by one while conserving N, so S^2 is
    assembled from the ladder identity S^2 = S^- S^+ + S^z (S^z + 1),
    which keeps the product sparse.
    """
    L = spec.L
    basis = enumerate_basis(2 * L, N)
    raise_coeff = np.zeros((2 * L, 2 * L))
    for i in range(L):
        raise_coeff[i, L + i] = 1.0
    splus = build_quadratic_operator(raise_coeff, basis, cap=cap).matrix
    sz_diag = 0.5 * (basis.states[:, :L].sum(axis=1) - basis.states[:, L:].sum(axis=1))
    sz = scipy.sparse.diags(sz_diag.astype(float)).tocsr()
    s2 = (splus.conj().T @ splus + sz @ sz + sz).tocsr()
    return SpinOperators(SparseOperator(basis, sz), SparseOperator(basis, s2))


def build_projector_factor(spec: ModelOneSpec, N, dtau, cap=DEFAULT_NNZ_CAP) -> ProjectorFactor:
    """1 - dtau*H on the N-particle sector, with positivity diagnostics.

    For entrywise nonnegative hopping the off-diagonal of 1 - dtau*H is
    nonnegative regardless of the interaction signs; the flags report
    whether all entries are >= 0 and whether the nonzero pattern is
    strongly connected (irreducible), the hypotheses of the elementwise
    Perron-Frobenius argument.  Violations are reported, not raised.
    """
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    h = build_model1_hamiltonian(spec, N, cap=cap)
    mat = (scipy.sparse.identity(h.dim, format="csr") - dtau * h.matrix).tocsr()
    mat.eliminate_zeros()
    if mat.nnz:
        min_entry = float(mat.data.real.min())
        nonnegative = bool(np.all(mat.data.real >= 0)) and not np.iscomplexobj(mat.data)
    else:
        min_entry = 0.0
        nonnegative = True
    pattern = mat.copy()
    pattern.data = np.ones_like(pattern.data, dtype=float)
    n_comp, _ = connected_components(pattern, directed=True, connection="strong")
    return ProjectorFactor(
        operator=SparseOperator(h.basis, mat),
        nonnegative=nonnegative,
        irreducible=bool(n_comp == 1),
        min_entry=min_entry,
    )
