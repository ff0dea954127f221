"""Model specifications for the two lattice boson models, plus standard builders.

A spec bundles the hopping matrix and the per-site interaction strengths.
Construction only enforces structural consistency (shapes, realness);
the physical hypotheses (symmetry/Hermiticity, interaction signs,
connectivity) are checked by :func:`validate_spec`, which reports each
one individually so out-of-hypothesis inputs can still be explored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelOneSpec",
    "ModelTwoSpec",
    "ValidationReport",
    "validate_spec",
    "build_standard_lattice",
]


def _as_real_matrix(a, name):
    arr = np.array(a)
    if np.iscomplexobj(arr):
        if np.any(arr.imag != 0):
            raise ValueError(f"{name} must be real")
        arr = arr.real
    arr = arr.astype(float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _as_site_vector(a, L, name):
    arr = np.array(a, dtype=float)
    if arr.ndim == 0:
        arr = np.full(L, arr.item())
    if arr.shape != (L,):
        raise ValueError(f"{name} must have length {L}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


class ModelOneSpec:
    """Single-component model: real hopping t_ij, on-site couplings U_i.

    H = -sum_ij t_ij a_i^+ a_j + sum_i U_i (a_i^+ a_i)^2
    """

    def __init__(self, hopping, interactions):
        t = _as_real_matrix(hopping, "hopping")
        U = _as_site_vector(interactions, t.shape[0], "interactions")
        t.setflags(write=False)
        U.setflags(write=False)
        self.hopping = t
        self.interactions = U

    @property
    def L(self) -> int:
        return self.hopping.shape[0]

    def __repr__(self):
        return f"ModelOneSpec(L={self.L})"


class ModelTwoSpec:
    """Two-component model with conjugate hoppings for the two species.

    H = -sum_ij t_ij b_i^+ b_j - sum_ij conj(t_ij) c_i^+ c_j
        + sum_i U1_i (n^b_i + n^c_i)^2 + sum_i U2_i (n^b_i - n^c_i)^2

    Only the b-component hopping is stored; the c-component is its
    elementwise complex conjugate by definition.
    """

    def __init__(self, hopping_b, interactions_1, interactions_2):
        tb = np.array(hopping_b, dtype=complex)
        if tb.ndim != 2 or tb.shape[0] != tb.shape[1]:
            raise ValueError(f"hopping_b must be a square matrix, got shape {tb.shape}")
        if not np.all(np.isfinite(tb)):
            raise ValueError("hopping_b has non-finite entries")
        L = tb.shape[0]
        U1 = _as_site_vector(interactions_1, L, "interactions_1")
        U2 = _as_site_vector(interactions_2, L, "interactions_2")
        tb.setflags(write=False)
        U1.setflags(write=False)
        U2.setflags(write=False)
        self.hopping_b = tb
        self.interactions_1 = U1
        self.interactions_2 = U2

    @property
    def L(self) -> int:
        return self.hopping_b.shape[0]

    @property
    def hopping_c(self) -> np.ndarray:
        return np.conj(self.hopping_b)

    def __repr__(self):
        return f"ModelTwoSpec(L={self.L})"


@dataclass(frozen=True)
class ValidationReport:
    """Per-invariant pass/fail record for a model spec."""

    model: str
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self):
        return [name for name, passed in self.checks.items() if not passed]


def bond_connected(hopping) -> bool:
    """Breadth-first search over nonzero off-diagonal bonds (no tolerance)."""
    t = np.asarray(hopping)
    L = t.shape[0]
    adj = (np.abs(t) > 0) | (np.abs(t.T) > 0)
    np.fill_diagonal(adj, False)
    seen = np.zeros(L, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.nonzero(adj[i])[0]:
            if not seen[j]:
                seen[j] = True
                stack.append(j)
    return bool(seen.all())


def validate_spec(spec) -> ValidationReport:
    """Check the model hypotheses, one verdict per invariant.

    Structural problems (wrong shapes, complex entries where reals are
    required) already raise at spec construction; everything here is a
    reported pass/fail, never an exception.
    """
    if isinstance(spec, ModelOneSpec):
        checks = {
            "symmetric": bool(np.array_equal(spec.hopping, spec.hopping.T)),
            "attractive_interactions": bool(np.all(spec.interactions < 0)),
            "connected": bond_connected(spec.hopping),
        }
        return ValidationReport("one", checks)
    if isinstance(spec, ModelTwoSpec):
        tb = spec.hopping_b
        checks = {
            "hermitian": bool(np.array_equal(tb, tb.conj().T)),
            "attractive_u1": bool(np.all(spec.interactions_1 < 0)),
            "repulsive_u2": bool(np.all(spec.interactions_2 > 0)),
            "connected": bond_connected(tb),
        }
        return ValidationReport("two", checks)
    raise TypeError(f"not a model spec: {type(spec).__name__}")


def build_standard_lattice(kind, L, t=1.0, U=None, U1=None, U2=None):
    """Build a chain, ring, or complete graph with uniform bond strength t.

    Pass U for a single-component spec, or U1 and U2 for a two-component
    spec (scalars broadcast to all sites).  A ring with L <= 2 degenerates
    to the chain; L = 1 has no bonds.
    """
    L = int(L)
    if L < 1:
        raise ValueError("L must be at least 1")
    if L >= 2 and t == 0:
        raise ValueError("bond strength t must be nonzero for L >= 2")
    hop = np.zeros((L, L))
    if kind == "chain":
        for i in range(L - 1):
            hop[i, i + 1] = hop[i + 1, i] = t
    elif kind == "ring":
        for i in range(L - 1):
            hop[i, i + 1] = hop[i + 1, i] = t
        if L > 2:
            hop[L - 1, 0] = hop[0, L - 1] = t
    elif kind == "complete":
        hop[:] = t
        np.fill_diagonal(hop, 0.0)
    else:
        raise ValueError(f"unknown lattice kind: {kind!r}")

    if U is not None and U1 is None and U2 is None:
        return ModelOneSpec(hop, U)
    if U is None and U1 is not None and U2 is not None:
        return ModelTwoSpec(hop.astype(complex), U1, U2)
    raise ValueError("give U (single component) or both U1 and U2 (two components)")
