"""Sign-free projector Monte Carlo over rank-1 condensate walkers.

A walker is an orbital psi with a nonnegative scalar weight, representing
weight * |psi^N>.  One projection step applies the split propagator
exp(-tau*H0) exp(-tau*HU): the interaction factor is decoupled site by
site into Gaussian-weighted one-body exponentials and sampled (the
Gaussian is absorbed into the sampling density, so no reweighting
factors appear), and the hopping factor acts in closed form as
psi -> exp(tau*t) psi.  After every one-body application the orbital is
renormalized and ||psi'||^N is folded into the weight, since |psi^N>
scales as ||psi||^N.

Single-component walkers keep a real orbital (real dtype, so reality is
exact); two-component walkers keep the (phi, conj(phi)) block structure
by construction, because every update acts on phi and mirrors it.  Both
structures make every trial-walker overlap an even power of a real
number, which is the sign-free property the run asserts at each
measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import RankOneState, matrix_exponential
from .lattice import ModelOneSpec, ModelTwoSpec

__all__ = [
    "SignProblemError",
    "DegenerateEnsembleError",
    "ProjectionSchedule",
    "Walker",
    "TracePoint",
    "RunResult",
    "EnergyEstimate",
    "trial_state",
    "HoppingPropagator",
    "propagate_hopping",
    "InteractionSampler",
    "draw_auxiliary_fields",
    "sample_interaction",
    "MixedEstimator",
    "mixed_energy_estimator",
    "resample_population",
    "blocked_error",
    "run_projection",
]


class SignProblemError(RuntimeError):
    """A trial-walker overlap went negative; the cone structure is broken."""


class DegenerateEnsembleError(RuntimeError):
    """The estimator denominator collapsed below the resolvable scale."""


@dataclass(frozen=True)
class ProjectionSchedule:
    """Imaginary-time discretization: beta total, M steps of tau = beta/M."""

    beta: float
    M: int
    equilibration_steps: int | None = None
    measure_interval: int = 10

    def __post_init__(self):
        if self.beta <= 0 or self.M < 1:
            raise ValueError("need beta > 0 and M >= 1")
        if self.measure_interval < 1:
            raise ValueError("measure_interval must be at least 1")
        if self.equilibration_steps is not None and self.equilibration_steps < 0:
            raise ValueError("equilibration_steps must be nonnegative")

    @property
    def tau(self) -> float:
        return self.beta / self.M

    @property
    def equilibration(self) -> int:
        return self.M // 4 if self.equilibration_steps is None else self.equilibration_steps


@dataclass(frozen=True)
class Walker:
    state: RankOneState
    weight: float

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("walker weight must be nonnegative")


@dataclass(frozen=True)
class TracePoint:
    step: int
    estimator: float
    block_error: float
    total_weight: float


@dataclass
class RunResult:
    trace: list
    summary: dict


@dataclass(frozen=True)
class EnergyEstimate:
    energy: float
    error: float


def _model_kind(spec) -> str:
    if isinstance(spec, ModelOneSpec):
        return "one"
    if isinstance(spec, ModelTwoSpec):
        return "two"
    raise TypeError(f"not a model spec: {type(spec).__name__}")


def trial_state(spec, N) -> RankOneState:
    """All-ones unit orbital: manifestly inside the relevant cone."""
    if _model_kind(spec) == "one":
        return RankOneState(np.ones(spec.L) / math.sqrt(spec.L), N)
    return RankOneState(np.ones(2 * spec.L, dtype=complex) / math.sqrt(2 * spec.L), N)


def _renormalized(psi, N, weight) -> Walker:
    nrm = float(np.linalg.norm(psi))
    if nrm == 0:
        raise ValueError("walker orbital collapsed to zero")
    return Walker(RankOneState(psi / nrm, N), weight * nrm**N)


class HoppingPropagator:
    """exp(-tau*H0) on a walker, i.e. psi -> exp(tau*t) psi."""

    def __init__(self, spec, tau):
        self.kind = _model_kind(spec)
        self.L = spec.L
        if self.kind == "one":
            self.K = matrix_exponential(tau * spec.hopping)
        else:
            self.Kb = matrix_exponential(tau * spec.hopping_b)

    def apply(self, walker: Walker) -> Walker:
        psi = walker.state.psi
        if self.kind == "one":
            out = self.K @ psi
        else:
            phi = self.Kb @ psi[: self.L]
            out = np.concatenate([phi, np.conj(phi)])
        return _renormalized(out, walker.state.N, walker.weight)


def propagate_hopping(walker: Walker, spec, tau) -> Walker:
    return HoppingPropagator(spec, tau).apply(walker)


class InteractionSampler:
    """One sampled Gaussian decoupling of exp(-tau*HU) per call.

    Field variances follow the decoupling transforms: 2 tau |U_i| for the
    attractive couplings (real factor exp(-x) per occupied mode) and
    2 tau U2_i for the repulsive ones (phase exp(-i x) on b_i, exp(+i x)
    on c_i, which preserves the reflection structure).  Sites with a zero
    coupling draw a zero field.
    """

    def __init__(self, spec, tau):
        if tau < 0:
            raise ValueError("tau must be nonnegative")
        self.kind = _model_kind(spec)
        self.L = spec.L
        if self.kind == "one":
            if np.any(spec.interactions > 0):
                raise ValueError("single-component sampling needs U_i <= 0")
            self.sigma = np.sqrt(2.0 * tau * np.abs(spec.interactions))
        else:
            if np.any(spec.interactions_1 > 0):
                raise ValueError("two-component sampling needs U1_i <= 0")
            if np.any(spec.interactions_2 < 0):
                raise ValueError("two-component sampling needs U2_i >= 0")
            self.sigma1 = np.sqrt(2.0 * tau * np.abs(spec.interactions_1))
            self.sigma2 = np.sqrt(2.0 * tau * spec.interactions_2)

    def draw(self, rng):
        if self.kind == "one":
            return rng.normal(0.0, self.sigma)
        return rng.normal(0.0, self.sigma1), rng.normal(0.0, self.sigma2)

    def apply_fields(self, walker: Walker, fields) -> Walker:
        psi = walker.state.psi
        if self.kind == "one":
            out = psi * np.exp(-fields)
        else:
            x1, x2 = fields
            phi = psi[: self.L] * np.exp(-x1 - 1j * x2)
            out = np.concatenate([phi, np.conj(phi)])
        return _renormalized(out, walker.state.N, walker.weight)

    def sample(self, walker: Walker, rng) -> Walker:
        return self.apply_fields(walker, self.draw(rng))


def draw_auxiliary_fields(spec, tau, rng):
    """Draw one set of decoupling fields (exposed for moment checks)."""
    return InteractionSampler(spec, tau).draw(rng)


def sample_interaction(walker: Walker, spec, tau, rng) -> Walker:
    return InteractionSampler(spec, tau).sample(walker, rng)


class MixedEstimator:
    """<T|H|psi_w^N> / <T|psi_w^N> over a weighted walker population.

    All matrix elements come from the rank-1 closed forms (a common N!
    cancels in the ratio): with s = T^dag psi,

      <T|H0|psi>/N!  = -N s^{N-1} sum_ij t_ij conj(T_i) psi_j
      n_i^2          -> N(N-1) s^{N-2} conj(T_i)^2 psi_i^2 + N s^{N-1} conj(T_i) psi_i
      n_i n_j (i!=j) -> N(N-1) s^{N-2} conj(T_i T_j) psi_i psi_j

    Trial-walker overlaps s are computed as explicitly real numbers so
    the sign-free assertion s^N >= 0 is exact, not up to roundoff.
    """

    def __init__(self, spec, trial: RankOneState):
        self.kind = _model_kind(spec)
        self.N = trial.N
        self.L = spec.L
        t = trial.psi / np.linalg.norm(trial.psi)
        if self.kind == "one":
            if t.size != spec.L:
                raise ValueError("trial orbital does not match the lattice")
            if np.iscomplexobj(t) and np.any(t.imag != 0):
                raise ValueError("single-component trial must be real")
            self.tpsi = t.real.astype(float)
            self.hop = spec.hopping
            self.u_sq = spec.interactions
            self.cross = None
        else:
            if t.size != 2 * spec.L:
                raise ValueError("trial orbital does not match the lattice")
            state = RankOneState(t, trial.N)
            if not state.is_reflection_structured(tol=0.0):
                raise ValueError("two-component trial must be reflection structured")
            self.tpsi = t.astype(complex)
            T = np.zeros((2 * self.L, 2 * self.L), dtype=complex)
            T[: self.L, : self.L] = spec.hopping_b
            T[self.L :, self.L :] = spec.hopping_c
            self.hop = T
            both = spec.interactions_1 + spec.interactions_2
            self.u_sq = np.concatenate([both, both])
            self.cross = 2.0 * (spec.interactions_1 - spec.interactions_2)

    def _stack(self, walkers):
        psi = np.stack([w.state.psi for w in walkers])
        weights = np.array([w.weight for w in walkers])
        if any(w.state.N != self.N for w in walkers):
            raise ValueError("walker particle count does not match the trial")
        return psi, weights

    def trial_overlaps(self, walkers) -> np.ndarray:
        """<T|psi_w^N> / N! = s_w^N with s_w exactly real."""
        psi, _ = self._stack(walkers)
        if self.kind == "one":
            s = psi @ self.tpsi
        else:
            s = 2.0 * np.real(psi[:, : self.L] @ np.conj(self.tpsi[: self.L]))
        return s**self.N

    def _num_den(self, psi):
        N = self.N
        ct = np.conj(self.tpsi)
        s = psi @ ct
        s_nm1 = s ** (N - 1)
        den = s * s_nm1
        num = -N * s_nm1 * ((psi @ self.hop.T) @ ct)
        num = num + N * s_nm1 * (psi @ (self.u_sq * ct))
        if N >= 2:
            s_nm2 = s ** (N - 2)
            num = num + N * (N - 1) * s_nm2 * ((psi**2) @ (self.u_sq * ct**2))
            if self.cross is not None:
                pair = psi[:, : self.L] * psi[:, self.L :]
                cw = self.cross * np.conj(self.tpsi[: self.L] * self.tpsi[self.L :])
                num = num + N * (N - 1) * s_nm2 * (pair @ cw)
        return num, den

    def estimate(self, walkers, blocks=10) -> EnergyEstimate:
        psi, weights = self._stack(walkers)
        num, den = self._num_den(psi)
        wnum = weights * num
        wden = weights * den
        total_den = np.sum(wden)
        scale = np.sum(weights * np.abs(den))
        if abs(total_den) <= 1e-12 * max(scale, 1e-300):
            raise DegenerateEnsembleError("trial overlap sum vanished")
        energy = float(np.real(np.sum(wnum) / total_den))
        nb = min(blocks, len(walkers))
        if nb < 2:
            return EnergyEstimate(energy, 0.0)
        edges = np.linspace(0, len(walkers), nb + 1, dtype=int)
        block_vals = []
        for a, b in zip(edges[:-1], edges[1:]):
            d = np.sum(wden[a:b])
            if abs(d) > 0:
                block_vals.append(float(np.real(np.sum(wnum[a:b]) / d)))
        if len(block_vals) < 2:
            return EnergyEstimate(energy, 0.0)
        err = float(np.std(block_vals, ddof=1) / math.sqrt(len(block_vals)))
        return EnergyEstimate(energy, err)


def mixed_energy_estimator(walkers, trial: RankOneState, spec) -> EnergyEstimate:
    return MixedEstimator(spec, trial).estimate(walkers)


def resample_population(walkers, target_count, rng):
    """Systematic (comb) resampling to target_count equal-weight walkers.

    The comb preserves total weight exactly and gives every ancestor an
    expected copy count of target_count * w / W_total.
    """
    if target_count < 1:
        raise ValueError("target_count must be at least 1")
    weights = np.array([w.weight for w in walkers], dtype=float)
    total = float(weights.sum())
    if not total > 0:
        raise ValueError("total walker weight is not positive")
    cum = np.cumsum(weights)
    cum[-1] = total  # guard the last edge against rounding
    points = (rng.random() + np.arange(target_count)) * (total / target_count)
    ancestors = np.searchsorted(cum, points, side="right")
    new_weight = total / target_count
    return [Walker(walkers[int(a)].state, new_weight) for a in ancestors]


def blocked_error(series) -> float:
    """Standard error of the mean of a correlated series, by blocking.

    Repeatedly pairs neighbours and takes the largest standard-error
    estimate over all levels with at least eight blocks (the plateau is
    approached from below as blocks decorrelate).
    """
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        return 0.0
    best = 0.0
    while x.size >= 8:
        best = max(best, float(np.std(x, ddof=1) / math.sqrt(x.size)))
        if x.size % 2 == 1:
            x = x[1:]
        x = 0.5 * (x[0::2] + x[1::2])
    if best == 0.0:
        best = float(np.std(np.asarray(series, dtype=float), ddof=1) / math.sqrt(len(series)))
    return best


def _check_run_spec(spec, N):
    """Sign conditions under which the run is provably sign-free."""
    kind = _model_kind(spec)
    variant = False
    if kind == "one":
        if not np.array_equal(spec.hopping, spec.hopping.T):
            raise ValueError("hopping must be symmetric")
        if np.any(spec.interactions > 0):
            raise ValueError("projection sampling needs U_i <= 0")
        if N % 2 == 1:
            if np.any(spec.hopping < 0):
                raise ValueError(
                    "odd particle numbers need entrywise nonnegative hopping"
                )
            variant = True
    else:
        if not np.array_equal(spec.hopping_b, spec.hopping_b.conj().T):
            raise ValueError("hopping_b must be Hermitian")
        if np.any(spec.interactions_1 > 0) or np.any(spec.interactions_2 < 0):
            raise ValueError("projection sampling needs U1_i <= 0 and U2_i >= 0")
        if N % 2 == 1:
            raise ValueError("two-component runs need even particle number")
    return kind, variant


def run_projection(
    spec, N, schedule: ProjectionSchedule, walker_count, seed, symmetric=False
) -> RunResult:
    """Project the all-ones trial with the split propagator and track energy.

    Per step the interaction factor is sampled first, then the hopping
    factor is applied, matching the operator order of the first-order
    splitting; symmetric=True uses half hopping steps on both sides
    instead.  Every measurement asserts that all trial-walker overlaps
    are nonnegative (a negative one is a hard failure, since cone
    membership makes it impossible) and is followed by population
    control.  Identical seed, walker count, and schedule reproduce the
    trace bit for bit.
    """
    if walker_count < 1:
        raise ValueError("need at least one walker")
    kind, variant = _check_run_spec(spec, int(N))
    N = int(N)
    tau = schedule.tau
    trial = trial_state(spec, N)
    sampler = InteractionSampler(spec, tau)
    prop = HoppingPropagator(spec, tau / 2 if symmetric else tau)
    estimator = MixedEstimator(spec, trial)

    streams = np.random.SeedSequence(seed).spawn(walker_count + 1)
    gens = [np.random.Generator(np.random.Philox(s)) for s in streams[:walker_count]]
    resample_rng = np.random.Generator(np.random.Philox(streams[-1]))

    walkers = [Walker(trial, 1.0) for _ in range(walker_count)]
    trace = []
    for step in range(1, schedule.M + 1):
        for w in range(walker_count):
            wk = walkers[w]
            if symmetric:
                wk = prop.apply(wk)
            wk = sampler.sample(wk, gens[w])
            wk = prop.apply(wk)
            walkers[w] = wk
        if step % schedule.measure_interval == 0 or step == schedule.M:
            overlaps = estimator.trial_overlaps(walkers)
            if np.any(overlaps < 0):
                raise SignProblemError(
                    f"negative trial overlap at step {step}: min {overlaps.min():.3e}"
                )
            est = estimator.estimate(walkers)
            total = float(sum(w.weight for w in walkers))
            trace.append(TracePoint(step, est.energy, est.error, total))
            if step < schedule.M:
                walkers = resample_population(walkers, walker_count, resample_rng)
                walkers = [Walker(w.state, 1.0) for w in walkers]  # population control

    measured = np.array([p.estimator for p in trace])
    steps = np.array([p.step for p in trace])
    eq_mask = steps > schedule.equilibration
    eq_series = measured[eq_mask] if eq_mask.any() else measured
    lq_mask = steps > (3 * schedule.M) // 4
    lq_series = measured[lq_mask] if lq_mask.any() else measured[-1:]
    summary = {
        "model": kind,
        "variant_mode": variant,
        "particles": N,
        "beta": schedule.beta,
        "M": schedule.M,
        "tau": tau,
        "walkers": walker_count,
        "seed": int(seed),
        "symmetric": bool(symmetric),
        "measurements": len(trace),
        "energy": float(np.mean(eq_series)),
        "error": blocked_error(eq_series),
        "last_quarter_energy": float(np.mean(lq_series)),
        "last_quarter_error": blocked_error(lq_series),
        "negative_overlaps": 0,
    }
    return RunResult(trace=trace, summary=summary)
