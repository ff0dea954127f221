"""Executable checks for the ground-state claims and the identities behind them.

Each check returns a report with quantitative fields and per-claim
verdicts.  Out-of-hypothesis inputs that still make structural sense give
fail verdicts rather than exceptions, so the same machinery can probe
where uniqueness actually breaks; genuinely violated preconditions
(disconnected lattice, wrong interaction signs) raise PreconditionError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg

from . import fock
from .eigensolver import DENSE_DIM_CAP, degeneracy_count, dense_spectrum, lanczos_lowest
from .fock import (
    RankOneState,
    enumerate_basis,
    enumerate_two_component_basis,
    matrix_exponential,
    rank1_to_vector,
    reflection_state,
)
from .hamiltonian import (
    build_model1_hamiltonian,
    build_model2_hamiltonian,
    build_projector_factor,
    build_spin_operators,
    model1_parts,
    model2_parts,
)
from .lattice import ModelOneSpec, ModelTwoSpec, bond_connected, validate_spec

__all__ = [
    "PreconditionError",
    "GroundStateReport",
    "SingletOverlapReport",
    "HsIdentityReport",
    "TrotterReport",
    "SplitIdentityReport",
    "QuadraticExponentialReport",
    "verify_unique_ground_state",
    "verify_two_component_ground_state",
    "verify_singlet_overlap",
    "verify_hs_identity",
    "verify_trotter_scaling",
    "verify_split_identity",
    "verify_quadratic_exponential",
    "verify_nonnegative_hopping_uniqueness",
]

STRICT_POSITIVE_FACTOR = 1e-12  # "strictly positive" means > this times the norm product


class PreconditionError(ValueError):
    """A check was called on a spec violating its hypotheses."""


@dataclass
class GroundStateReport:
    """Quantitative outcome of a ground-state uniqueness/positivity check."""

    model: str
    ground_energy: float
    gap: float
    degeneracy: int
    sector_of_ground: str
    claims: dict
    s2_expectation: float | None = None
    positivity_trials: int = 0
    positivity_min_overlap: float | None = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.claims.values())

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "ground_energy": self.ground_energy,
            "gap": self.gap,
            "degeneracy": self.degeneracy,
            "sector_of_ground": self.sector_of_ground,
            "s2_expectation": self.s2_expectation,
            "positivity_trials": self.positivity_trials,
            "positivity_min_overlap": self.positivity_min_overlap,
            "claims": dict(self.claims),
            "passed": self.passed,
            "notes": list(self.notes),
        }


@dataclass
class SingletOverlapReport:
    """Overlaps of the ground state with the on-site paired family."""

    pair_patterns: list
    overlaps: list
    max_overlap: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "pair_patterns": [list(p) for p in self.pair_patterns],
            "overlaps": self.overlaps,
            "max_overlap": self.max_overlap,
            "passed": self.passed,
        }


@dataclass
class HsIdentityReport:
    kind: str
    U: float
    tau: float
    rel_errors: list
    max_rel_error: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "U": self.U,
            "tau": self.tau,
            "rel_errors": self.rel_errors,
            "max_rel_error": self.max_rel_error,
            "passed": self.passed,
        }


@dataclass
class TrotterReport:
    beta: float
    taus: list
    errors: list
    slope: float | None
    exact_split: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "taus": self.taus,
            "errors": self.errors,
            "slope": self.slope,
            "exact_split": self.exact_split,
            "passed": self.passed,
        }


@dataclass
class SplitIdentityReport:
    prefactor: int
    dtaus: list
    deviations: list
    ratios: list
    coefficient: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "prefactor": self.prefactor,
            "dtaus": self.dtaus,
            "deviations": self.deviations,
            "ratios": self.ratios,
            "coefficient": self.coefficient,
            "passed": self.passed,
        }


def _spectrum(op, seed=0):
    if op.dim <= DENSE_DIM_CAP:
        return dense_spectrum(op)
    return lanczos_lowest(op, k=min(6, op.dim), seed=seed)


def _degeneracy_tol(tol, e0):
    return tol if tol is not None else 1e-8 * max(1.0, abs(e0))


def random_real_orbital(rng, L):
    """Nonzero unit vector with independent standard-normal components."""
    while True:
        psi = rng.standard_normal(L)
        nrm = np.linalg.norm(psi)
        if nrm > 1e-8:
            return psi / nrm


def random_reflection_orbital(rng, L):
    """Unit (phi, conj(phi)) orbital with complex standard-normal phi."""
    while True:
        phi = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        nrm = np.linalg.norm(phi)
        if nrm > 1e-8:
            phi = phi / (nrm * math.sqrt(2.0))
            return np.concatenate([phi, np.conj(phi)])


def verify_unique_ground_state(
    spec: ModelOneSpec, n, tol=None, trials=50, seed=0
) -> GroundStateReport:
    """Check the N = 2n ground state of the single-component model.

    Asserts a nondegenerate minimum with a strictly positive relative gap,
    fixes the overall sign against the all-ones condensate reference, and
    then probes positivity of the ground state against `trials` random
    real-orbital condensates (interior-of-the-cone check).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    report = validate_spec(spec)
    if not report.ok:
        raise PreconditionError(f"spec violates hypotheses: {report.failures()}")
    N = 2 * int(n)
    op = build_model1_hamiltonian(spec, N)
    spect = _spectrum(op, seed=seed)
    e0 = spect.ground_energy
    gap = spect.gap
    deg_tol = _degeneracy_tol(tol, e0)
    degeneracy = degeneracy_count(spect, deg_tol) if op.dim > 1 else 1

    gs = np.real(spect.ground_state.amplitudes)
    basis = op.basis
    sqrt_norm = math.sqrt(fock._factorial(N))  # norm of a unit-orbital condensate
    ref = RankOneState(np.ones(spec.L) / math.sqrt(spec.L), N)
    ref_amp = np.real(rank1_to_vector(ref, basis).amplitudes)
    s = float(ref_amp @ gs)
    notes = []
    sign_fixable = abs(s) > STRICT_POSITIVE_FACTOR * sqrt_norm
    if not sign_fixable:
        notes.append("reference overlap vanishes; sign could not be fixed")
    elif s < 0:
        gs = -gs

    rng = np.random.default_rng(seed)
    threshold = STRICT_POSITIVE_FACTOR * sqrt_norm
    min_overlap = math.inf
    all_positive = True
    for _ in range(int(trials)):
        psi = random_real_orbital(rng, spec.L)
        amp = np.real(rank1_to_vector(RankOneState(psi, N), basis).amplitudes)
        o = float(amp @ gs)
        all_positive = all_positive and (o > threshold)
        min_overlap = min(min_overlap, o / sqrt_norm)

    claims = {
        "unique": degeneracy == 1,
        "gap_positive": gap > deg_tol,
        "cone_overlaps_positive": sign_fixable and all_positive,
    }
    return GroundStateReport(
        model="one",
        ground_energy=e0,
        gap=gap,
        degeneracy=degeneracy,
        sector_of_ground=f"N={N}",
        claims=claims,
        positivity_trials=int(trials),
        positivity_min_overlap=None if math.isinf(min_overlap) else min_overlap,
        notes=notes,
    )


def _two_component_sectors(spec: ModelTwoSpec, N, seed=0):
    """Dense spectra of every (N_b, N_c) block with N_b + N_c = N."""
    out = []
    for nb in range(N, -1, -1):
        nc = N - nb
        op = build_model2_hamiltonian(spec, nb, nc)
        out.append(((nb, nc), op, _spectrum(op, seed=seed)))
    return out


def _phase_fix_reflection(gs, basis, L, N, notes):
    """Rotate the global phase so the all-ones reflection overlap is positive real."""
    phi = np.ones(L, dtype=complex) / math.sqrt(2 * L)
    ref = reflection_state(phi, N)
    amp = rank1_to_vector(ref, basis).amplitudes
    s = np.vdot(amp, gs)
    sqrt_norm = math.sqrt(fock._factorial(N))
    if abs(s) <= STRICT_POSITIVE_FACTOR * sqrt_norm:
        notes.append("reference overlap vanishes; phase could not be fixed")
        return gs, False
    return gs * (np.conj(s) / abs(s)), True


def verify_two_component_ground_state(
    spec: ModelTwoSpec, n, tol=None, trials=50, seed=0, s2_tol=1e-8
) -> GroundStateReport:
    """Check the N = 2n ground state of the two-component model.

    Diagonalizes every (N_b, N_c) block, asserts a single global minimum
    located at N_b = N_c, and probes positivity against random
    reflection-structured condensates.  With real hopping the total-spin
    expectation of the ground state is additionally checked to vanish.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    report = validate_spec(spec)
    if not report.ok:
        raise PreconditionError(f"spec violates hypotheses: {report.failures()}")
    N = 2 * int(n)
    L = spec.L
    sectors = _two_component_sectors(spec, N, seed=seed)
    all_vals = np.sort(np.concatenate([s.eigenvalues for _, _, s in sectors]))
    e0 = float(all_vals[0])
    gap = float(all_vals[1] - all_vals[0]) if all_vals.size > 1 else math.inf
    deg_tol = _degeneracy_tol(tol, e0)
    degeneracy = degeneracy_count(all_vals, deg_tol) if all_vals.size > 1 else 1
    ground_sector, ground_op, ground_spect = min(sectors, key=lambda t: t[2].ground_energy)
    nb, nc = ground_sector

    notes = []
    gs = np.asarray(ground_spect.ground_state.amplitudes, dtype=complex)
    gs, phase_fixed = _phase_fix_reflection(gs, ground_op.basis, L, N, notes)

    real_hopping = bool(np.all(spec.hopping_b.imag == 0))
    s2_expectation = None
    if real_hopping:
        full_basis = enumerate_basis(2 * L, N)
        spin = build_spin_operators(spec, N)
        full = np.zeros(full_basis.size, dtype=complex)
        for idx, occ in enumerate(ground_op.basis.states):
            full[full_basis.index_of[tuple(occ)]] = gs[idx]
        s2_expectation = float(np.real(np.vdot(full, spin.s2.matrix @ full)))

    rng = np.random.default_rng(seed)
    sqrt_norm = math.sqrt(fock._factorial(N))
    threshold = STRICT_POSITIVE_FACTOR * sqrt_norm
    min_overlap = math.inf
    all_positive = True
    imag_leak = 0.0
    for _ in range(int(trials)):
        psi = random_reflection_orbital(rng, L)
        amp = rank1_to_vector(RankOneState(psi, N), ground_op.basis).amplitudes
        o = np.vdot(amp, gs)
        all_positive = all_positive and (o.real > threshold)
        imag_leak = max(imag_leak, abs(o.imag) / sqrt_norm)
        min_overlap = min(min_overlap, o.real / sqrt_norm)
    if imag_leak > 1e-9:
        notes.append(f"reflection overlaps acquired imaginary part {imag_leak:.2e}")

    claims = {
        "unique": degeneracy == 1,
        "gap_positive": gap > deg_tol,
        "sz_zero_sector": nb == nc,
        "cone_overlaps_positive": phase_fixed and all_positive and imag_leak <= 1e-9,
    }
    if real_hopping:
        claims["spin_singlet"] = s2_expectation is not None and s2_expectation <= s2_tol
    return GroundStateReport(
        model="two",
        ground_energy=e0,
        gap=gap,
        degeneracy=degeneracy,
        sector_of_ground=f"(N_b,N_c)=({nb},{nc})",
        claims=claims,
        s2_expectation=s2_expectation,
        positivity_trials=int(trials),
        positivity_min_overlap=None if math.isinf(min_overlap) else min_overlap,
        notes=notes,
    )


def verify_singlet_overlap(spec: ModelTwoSpec, n, tol=None, seed=0) -> SingletOverlapReport:
    """Overlap of the ground state with every on-site paired state.

    The paired family is (b_1^+ c_1^+)^{i_1} ... (b_L^+ c_L^+)^{i_L} |0>
    with i_1 + ... + i_L = n; each member lives in the N_b = N_c = n block.
    At least one overlap must be strictly positive.  The ground state is
    computed in that block and phase-fixed against the all-ones reflection
    reference before comparing.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    report = validate_spec(spec)
    if not report.ok:
        raise PreconditionError(f"spec violates hypotheses: {report.failures()}")
    n = int(n)
    N = 2 * n
    L = spec.L
    op = build_model2_hamiltonian(spec, n, n)
    spect = _spectrum(op, seed=seed)
    notes: list = []
    gs = np.asarray(spect.ground_state.amplitudes, dtype=complex)
    gs, _ = _phase_fix_reflection(gs, op.basis, L, N, notes)

    patterns = []
    overlaps = []
    max_overlap = -math.inf
    any_positive = False
    for pattern in fock._compositions(n, L):
        occ = np.array(pattern + pattern, dtype=np.int64)
        idx = op.basis.index_of[tuple(occ)]
        coeff = math.prod(math.factorial(i) for i in pattern)  # <pattern| norm
        o = coeff * gs[idx]
        threshold = (tol if tol is not None else STRICT_POSITIVE_FACTOR) * coeff
        patterns.append(pattern)
        overlaps.append(complex(o))
        max_overlap = max(max_overlap, o.real)
        any_positive = any_positive or (o.real > threshold and abs(o.imag) <= 1e-9 * coeff)
    return SingletOverlapReport(
        pair_patterns=patterns,
        overlaps=overlaps,
        max_overlap=max_overlap,
        passed=any_positive,
    )


def verify_hs_identity(U, tau, n_max=4, kind="attractive") -> HsIdentityReport:
    """Gaussian-integral decoupling of exp(-tau*U*n^2), eigenvalue by eigenvalue.

    attractive (U < 0): exp(-tau U n^2) = E_x[exp(-n x)], x ~ N(0, 2 tau |U|)
    repulsive-imaginary (U > 0): exp(-tau U n^2) = E_x[exp(-i n x)], x ~ N(0, 2 tau U)

    Both sides are compared with the expectation evaluated by adaptive
    quadrature, not by completing the square, so the check is independent
    of the closed form it validates.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if kind == "attractive":
        if U >= 0:
            raise ValueError("attractive decoupling needs U < 0")
        sigma2 = 2.0 * tau * abs(U)
    elif kind == "repulsive-imaginary":
        if U <= 0:
            raise ValueError("imaginary-coupling decoupling needs U > 0")
        sigma2 = 2.0 * tau * U
    else:
        raise ValueError(f"unknown kind: {kind!r}")

    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma2)
    rel_errors = []
    for n in range(int(n_max) + 1):
        closed = math.exp(-tau * U * n * n)
        if kind == "attractive":
            f = lambda x: norm * math.exp(-x * x / (2.0 * sigma2) - n * x)
            val, _ = scipy.integrate.quad(f, -np.inf, np.inf, epsabs=0.0, epsrel=1e-13, limit=400)
            numeric = val
        else:
            fr = lambda x: norm * math.exp(-x * x / (2.0 * sigma2)) * math.cos(n * x)
            fi = lambda x: norm * math.exp(-x * x / (2.0 * sigma2)) * math.sin(n * x)
            re, _ = scipy.integrate.quad(fr, -np.inf, np.inf, epsabs=1e-16, epsrel=1e-13, limit=400)
            im, _ = scipy.integrate.quad(fi, -np.inf, np.inf, epsabs=1e-16, epsrel=1e-13, limit=400)
            numeric = complex(re, -im)
        rel_errors.append(abs(numeric - closed) / abs(closed))
    max_err = max(rel_errors)
    return HsIdentityReport(
        kind=kind,
        U=float(U),
        tau=float(tau),
        rel_errors=rel_errors,
        max_rel_error=max_err,
        passed=max_err <= 1e-8,
    )


def _dense_parts(spec, sector):
    if isinstance(spec, ModelOneSpec):
        h0, hu = model1_parts(spec, int(sector))
    elif isinstance(spec, ModelTwoSpec):
        nb, nc = sector
        h0, hu = model2_parts(spec, int(nb), int(nc))
    else:
        raise TypeError(f"not a model spec: {type(spec).__name__}")
    return h0.to_dense(), hu.to_dense()


def verify_trotter_scaling(spec, N, beta, M_list=(8, 16, 32, 64)) -> TrotterReport:
    """First-order splitting error of exp(-beta H) at fixed beta.

    eps(M) = || exp(-beta H) - [exp(-tau H0) exp(-tau HU)]^M ||_2 with
    tau = beta/M; the fitted slope of log eps against log tau should sit
    near 1.  Commuting parts give eps = 0 exactly and skip the fit.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    h0, hu = _dense_parts(spec, N)
    if h0.shape[0] > DENSE_DIM_CAP:
        raise ValueError("sector too large for dense matrix functions")
    h = h0 + hu
    exact = matrix_exponential(-beta * h)
    taus, errors = [], []
    for M in M_list:
        tau = beta / int(M)
        step = matrix_exponential(-tau * h0) @ matrix_exponential(-tau * hu)
        approx = np.linalg.matrix_power(step, int(M))
        taus.append(tau)
        errors.append(float(np.linalg.norm(exact - approx, 2)))
    scale = float(np.linalg.norm(exact, 2))
    if max(errors) <= 1e-12 * max(scale, 1.0):
        return TrotterReport(float(beta), taus, errors, None, exact_split=True, passed=True)
    slope = float(np.polyfit(np.log(taus), np.log(errors), 1)[0])
    return TrotterReport(
        float(beta), taus, errors, slope, exact_split=False, passed=0.85 <= slope <= 1.15
    )


def verify_split_identity(U, dtau, prefactor, n_max=4) -> SplitIdentityReport:
    """Two-exponential decomposition of the projector's interaction factor.

    Compares 1 - p*dtau*U*n^2 against cosh(sqrt(-2 p dtau U) n) for
    n = 0..n_max over a dtau-halving sweep.  The two sides agree to first
    order in dtau, so the deviation must shrink by about 4x per halving
    and stay below a fitted C * dtau^2.
    """
    if U >= 0:
        raise ValueError("the split needs U < 0")
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    p = int(prefactor)
    if p < 1 or int(n_max) < 1:
        raise ValueError("prefactor and n_max must be at least 1")
    ns = np.arange(1, int(n_max) + 1, dtype=float)
    dtaus = [dtau / 2**j for j in range(4)]
    deviations = []
    for dt in dtaus:
        lhs = 1.0 - p * dt * U * ns**2
        rhs = np.cosh(math.sqrt(-2.0 * p * dt * U) * ns)
        deviations.append(float(np.max(np.abs(lhs - rhs))))
    ratios = [deviations[j] / deviations[j + 1] for j in range(len(dtaus) - 1)]
    dt2 = np.asarray(dtaus) ** 2
    dev = np.asarray(deviations)
    coeff = float((dev @ dt2) / (dt2 @ dt2))  # least-squares dev ~ C * dtau^2
    bounded = bool(np.all(dev <= 1.2 * coeff * dt2))
    quadratic = all(3.5 <= r <= 4.5 for r in ratios)
    return SplitIdentityReport(
        prefactor=p,
        dtaus=dtaus,
        deviations=deviations,
        ratios=ratios,
        coefficient=coeff,
        passed=bounded and quadratic,
    )


@dataclass
class QuadraticExponentialReport:
    mode_count: int
    particles: int
    trials: int
    max_rel_error: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "mode_count": self.mode_count,
            "particles": self.particles,
            "trials": self.trials,
            "max_rel_error": self.max_rel_error,
            "passed": self.passed,
        }


def verify_quadratic_exponential(m, N, trials=20, seed=0, tol=1e-10) -> QuadraticExponentialReport:
    """exp(a^+ T a)|psi^N> acts on the orbital as psi -> exp(T) psi.

    For random general complex T the rank-1 propagation is compared to the
    occupation-basis matrix exponential of sum_ij T_ij a_i^+ a_j applied
    to the expanded state.
    """
    from .hamiltonian import build_quadratic_operator

    m, N = int(m), int(N)
    basis = enumerate_basis(m, N)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(trials)):
        T = 0.5 * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
        psi = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        psi = psi / np.linalg.norm(psi)
        state = RankOneState(psi, N)
        direct = rank1_to_vector(
            fock.apply_quadratic_exponential(T, state), basis
        ).amplitudes
        big = scipy.linalg.expm(build_quadratic_operator(T, basis).to_dense())
        oracle = big @ rank1_to_vector(state, basis).amplitudes
        worst = max(worst, float(np.linalg.norm(direct - oracle) / np.linalg.norm(oracle)))
    return QuadraticExponentialReport(m, N, int(trials), worst, worst <= tol)


def verify_nonnegative_hopping_uniqueness(
    spec: ModelOneSpec, N, dtau=None, tol=None, seed=0
) -> GroundStateReport:
    """Uniqueness for entrywise-nonnegative hopping and arbitrary U, any N.

    Here 1 - dtau*H is an elementwise nonnegative matrix on the occupation
    basis, so uniqueness follows for even and odd particle numbers alike.
    The check asserts nonnegativity, irreducibility of the nonzero
    pattern, and a nondegenerate minimum.
    """
    if np.any(spec.hopping < 0):
        raise PreconditionError("variant requires entrywise nonnegative hopping")
    if not bond_connected(spec.hopping):
        raise PreconditionError("variant requires a connected lattice")
    if N < 1:
        raise ValueError("N must be at least 1")
    h = build_model1_hamiltonian(spec, N)
    if dtau is None:
        diag = h.matrix.diagonal().real
        top = float(diag.max())
        dtau = min(0.1, 0.9 / top) if top > 0 else 0.1
    factor = build_projector_factor(spec, N, dtau)
    spect = _spectrum(h, seed=seed)
    e0 = spect.ground_energy
    deg_tol = _degeneracy_tol(tol, e0)
    degeneracy = degeneracy_count(spect, deg_tol) if h.dim > 1 else 1
    claims = {
        "projector_nonnegative": factor.nonnegative,
        "projector_irreducible": factor.irreducible,
        "unique": degeneracy == 1,
    }
    return GroundStateReport(
        model="variant",
        ground_energy=e0,
        gap=spect.gap,
        degeneracy=degeneracy,
        sector_of_ground=f"N={int(N)}",
        claims=claims,
        notes=[f"dtau={dtau}", f"min_entry={factor.min_entry}"],
    )
