"""Occupation bases, rank-1 condensate states, and one-body exponentials.

The workhorse state is ``|psi^N> = (sum_i psi_i a_i^+)^N |0>``: N bosons
sharing a single orbital psi.  Expanding over occupation vectors
(n_1..n_m) with sum(n) = N gives the amplitude

    N! * prod_i psi_i^{n_i} / sqrt(n_i!)

from which the closed forms used everywhere else follow:

    <psi1^N | psi2^N>     = N! (psi1^dag psi2)^N
    exp(a^+ T a) |psi^N>  = |[exp(T) psi]^N>
    a_j |psi^N>           = N psi_j |psi^{N-1}>

States are kept unnormalized; scaling psi by c scales |psi^N> by c^N, so
callers (the QMC in particular) fold norms into scalar weights.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

__all__ = [
    "DEFAULT_BASIS_CAP",
    "OccupationBasis",
    "SectorVector",
    "RankOneState",
    "reflection_state",
    "enumerate_basis",
    "enumerate_two_component_basis",
    "rank1_to_vector",
    "overlap_rank1",
    "matrix_exponential",
    "apply_quadratic_exponential",
    "rank1_matrix_elements",
]

DEFAULT_BASIS_CAP = 10**7


def _factorial(n: int) -> float:
    # exact below the float ceiling, log-gamma beyond it
    if n < 171:
        return float(math.factorial(n))
    return math.exp(math.lgamma(n + 1))


class OccupationBasis:
    """Ordered occupation vectors of one particle-number sector.

    The ordering is lexicographically descending on the occupation vector
    and is stable across runs, so indices are reproducible in reports.
    ``index_of`` maps occupation tuples back to row positions.
    """

    def __init__(self, mode_count, particle_count, states):
        st = np.array(states, dtype=np.int64)
        if st.ndim != 2 or st.shape[1] != mode_count:
            raise ValueError("states must be a (size, mode_count) array")
        st.setflags(write=False)
        self.mode_count = int(mode_count)
        self.particle_count = int(particle_count)
        self.states = st
        self.index_of = {tuple(map(int, row)): k for k, row in enumerate(st)}
        fact = np.array([_factorial(k) for k in range(self.particle_count + 1)])
        self._inv_sqrt_fact = 1.0 / np.sqrt(np.prod(fact[st], axis=1))

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def __len__(self):
        return self.size

    def index(self, occupation) -> int:
        return self.index_of[tuple(int(n) for n in occupation)]

    def __repr__(self):
        return (
            f"OccupationBasis(m={self.mode_count}, N={self.particle_count}, "
            f"size={self.size})"
        )


class SectorVector:
    """Amplitude vector over an OccupationBasis."""

    def __init__(self, basis: OccupationBasis, amplitudes):
        amp = np.asarray(amplitudes)
        if amp.shape != (basis.size,):
            raise ValueError(f"amplitudes must have length {basis.size}")
        self.basis = basis
        self.amplitudes = amp

    def inner(self, other: "SectorVector"):
        """<self|other>, conjugating this vector."""
        if self.basis is not other.basis and self.basis.index_of != other.basis.index_of:
            raise ValueError("vectors live on different bases")
        return np.vdot(self.amplitudes, other.amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


class RankOneState:
    """Unnormalized condensate state |psi^N> = (a^+ . psi)^N |0>."""

    def __init__(self, psi, N):
        p = np.array(psi)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("psi must be a nonempty vector")
        if not np.all(np.isfinite(p)):
            raise ValueError("psi has non-finite entries")
        p.setflags(write=False)
        self.psi = p
        self.N = int(N)
        if self.N < 0:
            raise ValueError("particle count must be nonnegative")

    @property
    def mode_count(self) -> int:
        return self.psi.size

    def mode_norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def normalized(self) -> "RankOneState":
        nrm = self.mode_norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero orbital")
        return RankOneState(self.psi / nrm, self.N)

    def is_reflection_structured(self, tol: float = 0.0) -> bool:
        """True when psi = (phi, conj(phi)) blockwise, within tol."""
        m = self.mode_count
        if m % 2 != 0:
            return False
        half = m // 2
        defect = np.abs(self.psi[half:] - np.conj(self.psi[:half])).max()
        return bool(defect <= tol)

    def __repr__(self):
        return f"RankOneState(m={self.mode_count}, N={self.N})"


def reflection_state(phi, N) -> RankOneState:
    """Build the reflection-structured orbital (phi, conj(phi))."""
    phi = np.asarray(phi, dtype=complex)
    return RankOneState(np.concatenate([phi, np.conj(phi)]), N)


def _compositions(total, parts):
    # descending lexicographic enumeration of (n_1..n_parts) with sum = total
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_basis(m, N, cap=DEFAULT_BASIS_CAP) -> OccupationBasis:
    """All occupation vectors of m modes and N particles, descending lex order."""
    m, N = int(m), int(N)
    if m < 1:
        raise ValueError("need at least one mode")
    if N < 0:
        raise ValueError("particle count must be nonnegative")
    size = math.comb(N + m - 1, N)
    if size > cap:
        raise ValueError(f"sector has {size} states, above the cap {cap}")
    states = np.fromiter(
        (n for occ in _compositions(N, m) for n in occ),
        dtype=np.int64,
        count=size * m,
    ).reshape(size, m)
    return OccupationBasis(m, N, states)


def enumerate_two_component_basis(L, N_b, N_c, cap=DEFAULT_BASIS_CAP) -> OccupationBasis:
    """Product sector for the two-component model.

    Modes are ordered b_1..b_L, c_1..c_L; the first block carries N_b
    particles and the second N_c.  The joint ordering is again descending
    lexicographic on the concatenated occupation vector.
    """
    L, N_b, N_c = int(L), int(N_b), int(N_c)
    if L < 1:
        raise ValueError("need at least one site")
    if N_b < 0 or N_c < 0:
        raise ValueError("particle counts must be nonnegative")
    size = math.comb(N_b + L - 1, N_b) * math.comb(N_c + L - 1, N_c)
    if size > cap:
        raise ValueError(f"sector has {size} states, above the cap {cap}")
    states = np.empty((size, 2 * L), dtype=np.int64)
    k = 0
    for occ_b in _compositions(N_b, L):
        for occ_c in _compositions(N_c, L):
            states[k, :L] = occ_b
            states[k, L:] = occ_c
            k += 1
    return OccupationBasis(2 * L, N_b + N_c, states)


def rank1_to_vector(state: RankOneState, basis: OccupationBasis) -> SectorVector:
    """Expand |psi^N> over the given basis.

    The basis may be a full N-particle sector or any sub-enumeration with
    the same mode and particle counts (e.g. a fixed (N_b, N_c) block);
    the amplitude formula restricts correctly either way.
    """
    if state.mode_count != basis.mode_count:
        raise ValueError(
            f"mode mismatch: state has {state.mode_count}, basis {basis.mode_count}"
        )
    if state.N != basis.particle_count:
        raise ValueError(
            f"particle mismatch: state has {state.N}, basis {basis.particle_count}"
        )
    powers = np.prod(state.psi[None, :] ** basis.states, axis=1)
    amp = _factorial(state.N) * powers * basis._inv_sqrt_fact
    return SectorVector(basis, amp)


def overlap_rank1(s1: RankOneState, s2: RankOneState):
    """<psi1^N | psi2^N> = N! (psi1^dag psi2)^N, conjugating the bra.

    For real orbitals and even N this is manifestly nonnegative; for
    reflection-structured orbitals, psi1^dag psi2 = 2 Re(phi1^dag phi2)
    is real, so even powers are again nonnegative.
    """
    if s1.N != s2.N:
        raise ValueError(f"particle counts differ: {s1.N} vs {s2.N}")
    if s1.mode_count != s2.mode_count:
        raise ValueError(f"mode counts differ: {s1.mode_count} vs {s2.mode_count}")
    return _factorial(s1.N) * np.vdot(s1.psi, s2.psi) ** s1.N


def matrix_exponential(T) -> np.ndarray:
    """exp(T) for a square matrix.

    Hermitian and anti-Hermitian inputs (everything the propagators
    generate) go through an eigendecomposition; anything else falls back
    to scipy's scaling-and-squaring.  Real symmetric input yields a real
    result.
    """
    A = np.asarray(T)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("T must be a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("T has non-finite entries")
    if np.array_equal(A, A.conj().T):
        w, V = np.linalg.eigh(A)
        out = (V * np.exp(w)) @ V.conj().T
        return out.real if not np.iscomplexobj(A) else out
    if np.array_equal(A, -A.conj().T):
        w, V = np.linalg.eigh(1j * A)
        return (V * np.exp(-1j * w)) @ V.conj().T
    return scipy.linalg.expm(A)


def apply_quadratic_exponential(T, state: RankOneState) -> RankOneState:
    """exp(a^+ T a) |psi^N> = |[exp(T) psi]^N>."""
    A = np.asarray(T)
    if A.shape != (state.mode_count, state.mode_count):
        raise ValueError(
            f"T must be {state.mode_count} x {state.mode_count}, got {A.shape}"
        )
    return RankOneState(matrix_exponential(A) @ state.psi, state.N)


def rank1_matrix_elements(bra: RankOneState, ket: RankOneState, op: str, i: int, j=None):
    """Closed-form <phi^N| O |psi^N> for a few normal-ordered operators.

    op:
      "hop"    a_i^+ a_j         = N^2 conj(phi_i) psi_j (N-1)! s^{N-1}
      "number" a_i^+ a_i          (hop with j = i)
      "pair"   a_i^+ a_i^+ a_i a_i = N^2 (N-1)^2 conj(phi_i)^2 psi_i^2 (N-2)! s^{N-2}
      "nn"     n_i n_j, i != j    = N^2 (N-1)^2 conj(phi_i phi_j) psi_i psi_j (N-2)! s^{N-2}

    with s = phi^dag psi.  "pair" and "nn" require N >= 2; note
    n_i^2 = pair(i) + number(i).
    """
    if bra.N != ket.N:
        raise ValueError(f"particle counts differ: {bra.N} vs {ket.N}")
    if bra.mode_count != ket.mode_count:
        raise ValueError(f"mode counts differ: {bra.mode_count} vs {ket.mode_count}")
    N = bra.N
    m = bra.mode_count
    if not 0 <= i < m:
        raise ValueError(f"mode index {i} out of range")
    phi, psi = bra.psi, ket.psi
    s = np.vdot(phi, psi)

    if op == "number":
        j = i
        op = "hop"
    if op == "hop":
        if j is None or not 0 <= j < m:
            raise ValueError("hop needs a valid second mode index")
        if N == 0:
            return 0.0
        return N**2 * np.conj(phi[i]) * psi[j] * _factorial(N - 1) * s ** (N - 1)
    if op == "pair":
        if N < 2:
            raise ValueError("pair needs at least two particles")
        return (
            N**2
            * (N - 1) ** 2
            * np.conj(phi[i]) ** 2
            * psi[i] ** 2
            * _factorial(N - 2)
            * s ** (N - 2)
        )
    if op == "nn":
        if j is None or not 0 <= j < m or j == i:
            raise ValueError("nn needs a distinct second mode index")
        if N < 2:
            raise ValueError("nn needs at least two particles")
        return (
            (N * (N - 1)) ** 2
            * np.conj(phi[i] * phi[j])
            * psi[i]
            * psi[j]
            * _factorial(N - 2)
            * s ** (N - 2)
        )
    raise ValueError(f"unknown operator kind: {op!r}")
