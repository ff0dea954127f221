"""Lowest eigenpairs of sector Hamiltonians and degeneracy counting.

Ground-state degeneracy is the central quantity of this package, so the
Lanczos path is deliberately conservative: full reorthogonalization (no
ghost eigenvalues), and convergence is only declared once a chain seeded
with a fresh random vector, orthogonal to everything found so far,
reproduces the same lowest Ritz values.  A single Krylov chain cannot see
the second copy of a degenerate pair; the restarted chain can.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fock import SectorVector
from .hamiltonian import SparseOperator

__all__ = ["SpectrumResult", "dense_spectrum", "lanczos_lowest", "degeneracy_count"]

DENSE_DIM_CAP = 4096


@dataclass
class SpectrumResult:
    """Ascending eigenvalues with eigenvectors and residual norms."""

    eigenvalues: np.ndarray
    eigenvectors: list
    residuals: np.ndarray
    converged: bool = True
    message: str = ""

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> SectorVector:
        return self.eigenvectors[0]

    @property
    def gap(self) -> float:
        if len(self.eigenvalues) < 2:
            return float("inf")
        return float(self.eigenvalues[1] - self.eigenvalues[0])


def dense_spectrum(op: SparseOperator) -> SpectrumResult:
    """Full spectrum by dense Hermitian diagonalization (dim <= 4096)."""
    if op.dim > DENSE_DIM_CAP:
        raise ValueError(f"dimension {op.dim} above the dense cap {DENSE_DIM_CAP}")
    H = op.to_dense()
    vals, vecs = np.linalg.eigh(H)
    res = np.linalg.norm(op.matrix @ vecs - vecs * vals[None, :], axis=0)
    vectors = [SectorVector(op.basis, vecs[:, i]) for i in range(op.dim)]
    return SpectrumResult(vals, vectors, res)


def lanczos_lowest(op: SparseOperator, k=6, tol=1e-10, max_iter=2000, seed=0) -> SpectrumResult:
    """k lowest eigenpairs via restarted Lanczos, deterministic in the seed.

    Residual convergence means ||H v - lam v|| <= tol * ||H||_est for every
    returned pair.  Non-convergence within max_iter matrix applications is
    reported (converged=False, message set) with the best iterates attached
    rather than raised.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    H = op.matrix
    dim = op.dim
    k = min(int(k), dim)
    is_complex = np.issubdtype(H.dtype, np.complexfloating)
    dtype = np.complex128 if is_complex else np.float64
    rng = np.random.default_rng(seed)

    max_basis = min(dim, max(12 * k, 200), max_iter)
    Q = np.zeros((dim, max_basis), dtype=dtype)
    HQ = np.zeros((dim, max_basis), dtype=dtype)
    T = np.zeros((max_basis, max_basis), dtype=dtype)
    m = 0
    matvecs = 0
    norm_h = 0.0

    def orthogonal_part(v):
        # two classical Gram-Schmidt passes against the whole basis
        for _ in range(2):
            if m:
                v = v - Q[:, :m] @ (Q[:, :m].conj().T @ v)
        return v

    def random_start():
        for _ in range(5):
            v = rng.standard_normal(dim)
            if is_complex:
                v = v + 1j * rng.standard_normal(dim)
            v = orthogonal_part(v / np.linalg.norm(v))
            nrm = np.linalg.norm(v)
            if nrm > 1e-8:
                return v / nrm
        return None

    def append(v):
        nonlocal m, matvecs, norm_h
        u = H @ v
        matvecs += 1
        Q[:, m] = v
        HQ[:, m] = u
        col = Q[:, : m + 1].conj().T @ u
        T[: m + 1, m] = col
        T[m, : m + 1] = col.conj()
        T[m, m] = col[m].real
        m += 1
        return u

    def ritz():
        nonlocal norm_h
        w, S = np.linalg.eigh(T[:m, :m])
        norm_h = max(norm_h, float(np.abs(w).max()))
        kk = min(k, m)
        X = Q[:, :m] @ S[:, :kk]
        HX = HQ[:, :m] @ S[:, :kk]
        res = np.linalg.norm(HX - X * w[:kk][None, :], axis=0)
        return w[:kk], X, res

    vals = np.zeros(0)
    vecs = np.zeros((dim, 0), dtype=dtype)
    res = np.zeros(0)
    converged = False
    last_chain_vals = None

    while m < max_basis and matvecs < max_iter and not converged:
        v = random_start()
        if v is None:
            break
        prev_vals = None
        stable = 0
        while m < max_basis and matvecs < max_iter:
            u = append(v)
            vals, vecs, res = ritz()
            scale = max(norm_h, 1e-30)
            settled = m >= k and bool(np.all(res <= tol * scale))
            if settled:
                if prev_vals is not None and np.max(np.abs(vals - prev_vals)) <= 10 * tol * scale:
                    stable += 1
                else:
                    stable = 0
                prev_vals = vals.copy()
                if stable >= 2:
                    break
            r = orthogonal_part(u)
            beta = np.linalg.norm(r)
            if beta <= 1e-12 * max(scale, 1e-30):
                break  # chain exhausted its invariant subspace
            v = r / beta
        scale = max(norm_h, 1e-30)
        if m >= k and np.all(res <= tol * scale):
            if last_chain_vals is not None and np.max(np.abs(vals - last_chain_vals)) <= 10 * tol * scale:
                converged = True  # a fresh restart found nothing new below
            last_chain_vals = vals.copy()
        else:
            last_chain_vals = None
        if m >= dim:
            converged = m >= k and bool(np.all(res <= tol * scale))
            break

    message = "" if converged else f"not converged after {matvecs} matrix applications"
    vectors = [SectorVector(op.basis, vecs[:, i]) for i in range(vals.size)]
    return SpectrumResult(vals, vectors, res, converged=bool(converged), message=message)


def degeneracy_count(result, tol=None) -> int:
    """Number of eigenvalues within tol of the minimum.

    Accepts a SpectrumResult or a plain ascending value sequence.  The
    default tolerance is 1e-8 * max(1, |E0|).  With fewer than two
    eigenvalues available the count defaults to 1 with a warning.
    """
    values = np.asarray(getattr(result, "eigenvalues", result), dtype=float)
    if values.size < 2:
        warnings.warn("fewer than two eigenvalues: degeneracy defaults to 1")
        return 1
    e0 = values.min()
    if tol is None:
        tol = 1e-8 * max(1.0, abs(e0))
    return int(np.count_nonzero(values <= e0 + tol))
