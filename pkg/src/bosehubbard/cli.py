"""Batch front-end: JSON experiment configs in, JSON/CSV reports out.

Subcommands: ed (sector spectra), verify (ground-state checks), qmc
(projection run), identities (decoupling/splitting/propagation checks).
Configs are strict: unknown keys anywhere are rejected with their field
path, so typos cannot silently change an experiment.  All randomness
flows from the config seed; reports are byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .eigensolver import DENSE_DIM_CAP, degeneracy_count, dense_spectrum, lanczos_lowest
from .hamiltonian import build_model1_hamiltonian, build_model2_hamiltonian
from .lattice import ModelOneSpec, ModelTwoSpec
from .qmc import ProjectionSchedule, run_projection

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "serialize_config",
           "run_command", "emit_report", "main"]

SCHEMA_VERSION = 1

TRACE_HEADER = "step,estimator,block_error,total_weight"


class ConfigError(ValueError):
    """Config validation failure; collects 'field.path: message' entries."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    lattice: dict
    interactions: dict
    sector: dict
    tolerances: dict
    qmc: dict
    outputs: dict

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "lattice": copy.deepcopy(self.lattice),
            "interactions": copy.deepcopy(self.interactions),
            "sector": copy.deepcopy(self.sector),
            "tolerances": copy.deepcopy(self.tolerances),
            "qmc": copy.deepcopy(self.qmc),
            "outputs": copy.deepcopy(self.outputs),
        }


_TOLERANCE_DEFAULTS = {
    "degeneracy": None,
    "s2": 1e-8,
    "overlap": 1e-12,
    "solver": 1e-10,
    "positivity_trials": 50,
}

_QMC_DEFAULTS = {
    "beta": 8.0,
    "M": 256,
    "walkers": 512,
    "seed": 1,
    "measure_interval": 10,
    "equilibration": None,
    "symmetric": False,
}


def _reject_unknown(section, allowed, path, errors):
    for key in section:
        if key not in allowed:
            errors.append(f"{path}.{key}: unknown key")


def _site_values(raw, L, path, errors):
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return [float(raw)] * L
    if isinstance(raw, list) and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
    ):
        if len(raw) != L:
            errors.append(f"{path}: expected {L} per-site values, got {len(raw)}")
            return None
        return [float(v) for v in raw]
    errors.append(f"{path}: expected a number or a list of numbers")
    return None


def _parse_lattice(raw, model, errors):
    if not isinstance(raw, dict):
        errors.append("lattice: expected an object")
        return None
    has_kind = "kind" in raw
    has_bonds = "bonds" in raw
    if has_kind == has_bonds:
        errors.append("lattice: give exactly one of 'kind' or 'bonds'")
        return None
    allowed = {"kind", "L", "t"} if has_kind else {"L", "bonds"}
    _reject_unknown(raw, allowed, "lattice", errors)
    L = raw.get("L")
    if not isinstance(L, int) or isinstance(L, bool) or L < 1:
        errors.append("lattice.L: expected a positive integer")
        return None
    out = {"L": L}
    if has_kind:
        kind = raw.get("kind")
        if kind not in ("chain", "ring", "complete"):
            errors.append("lattice.kind: expected one of chain, ring, complete")
            return None
        t = raw.get("t", 1.0)
        if not isinstance(t, (int, float)) or isinstance(t, bool):
            errors.append("lattice.t: expected a number")
            return None
        if L >= 2 and t == 0:
            errors.append("lattice.t: must be nonzero for L >= 2")
            return None
        out.update(kind=kind, t=float(t))
        return out
    bonds = raw.get("bonds")
    if not isinstance(bonds, list) or not bonds and L > 1:
        errors.append("lattice.bonds: expected a nonempty list of [i, j, re, im]")
        return None
    seen = set()
    norm_bonds = []
    for idx, bond in enumerate(bonds):
        path = f"lattice.bonds[{idx}]"
        if (
            not isinstance(bond, list)
            or len(bond) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bond)
        ):
            errors.append(f"{path}: expected [i, j, re, im]")
            continue
        i, j, re, im = bond
        if int(i) != i or int(j) != j or not (1 <= i <= L) or not (1 <= j <= L):
            errors.append(f"{path}: site indices must lie in [1, {L}]")
            continue
        key = (min(int(i), int(j)), max(int(i), int(j)))
        if key in seen:
            errors.append(f"{path}: duplicate bond {key}")
            continue
        seen.add(key)
        if model in ("one", "variant") and im != 0:
            errors.append(f"{path}: hopping must be real for this model")
            continue
        if i == j and im != 0:
            errors.append(f"{path}: diagonal entries must be real")
            continue
        if model == "variant" and re < 0:
            errors.append(f"{path}: variant hopping must be nonnegative")
            continue
        norm_bonds.append([int(i), int(j), float(re), float(im)])
    out["bonds"] = norm_bonds
    return out


def _parse_interactions(raw, model, L, errors):
    if not isinstance(raw, dict):
        errors.append("interactions: expected an object")
        return None
    if model in ("one", "variant"):
        _reject_unknown(raw, {"U"}, "interactions", errors)
        if "U" not in raw:
            errors.append("interactions.U: required")
            return None
        U = _site_values(raw["U"], L, "interactions.U", errors)
        if U is None:
            return None
        if model == "one" and not all(u < 0 for u in U):
            errors.append("interactions.U: must be strictly negative for model one")
            return None
        return {"U": U}
    _reject_unknown(raw, {"U1", "U2"}, "interactions", errors)
    if "U1" not in raw or "U2" not in raw:
        errors.append("interactions: model two needs U1 and U2")
        return None
    U1 = _site_values(raw["U1"], L, "interactions.U1", errors)
    U2 = _site_values(raw["U2"], L, "interactions.U2", errors)
    if U1 is None or U2 is None:
        return None
    if not all(u < 0 for u in U1):
        errors.append("interactions.U1: must be strictly negative")
        return None
    if not all(u > 0 for u in U2):
        errors.append("interactions.U2: must be strictly positive")
        return None
    return {"U1": U1, "U2": U2}


def _parse_sector(raw, model, errors):
    if not isinstance(raw, dict):
        errors.append("sector: expected an object")
        return None
    _reject_unknown(raw, {"N", "Sz"}, "sector", errors)
    N = raw.get("N")
    if not isinstance(N, int) or isinstance(N, bool) or N < 0:
        errors.append("sector.N: expected a nonnegative integer")
        return None
    out = {"N": N, "Sz": None}
    if raw.get("Sz") is not None:
        if model != "two":
            errors.append("sector.Sz: only meaningful for model two")
            return None
        sz = raw["Sz"]
        if not isinstance(sz, (int, float)) or isinstance(sz, bool):
            errors.append("sector.Sz: expected a number")
            return None
        two_sz = 2 * sz
        if int(two_sz) != two_sz or (N - int(two_sz)) % 2 != 0 or abs(two_sz) > N:
            errors.append("sector.Sz: incompatible with sector.N")
            return None
        out["Sz"] = float(sz)
    return out


def _parse_scalar_section(raw, defaults, path, errors, checks):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        errors.append(f"{path}: expected an object")
        return None
    _reject_unknown(raw, set(defaults), path, errors)
    out = dict(defaults)
    out.update(raw)
    for key, check in checks.items():
        if not check(out[key]):
            errors.append(f"{path}.{key}: invalid value {out[key]!r}")
            return None
    return out


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_config(text) -> ExperimentConfig:
    """Parse and validate a JSON experiment config, filling defaults."""
    try:
        raw = json.loads(text) if isinstance(text, str) else dict(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"document: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["document: expected a JSON object"])
    errors: list = []
    _reject_unknown(
        raw,
        {"model", "lattice", "interactions", "sector", "tolerances", "qmc", "outputs"},
        "config",
        errors,
    )
    model = raw.get("model")
    if model not in ("one", "two", "variant"):
        errors.append("model: expected 'one', 'two', or 'variant'")
        raise ConfigError(errors)
    lattice = _parse_lattice(raw.get("lattice", {}), model, errors)
    L = lattice["L"] if lattice else 1
    interactions = _parse_interactions(raw.get("interactions", {}), model, L, errors)
    sector = _parse_sector(raw.get("sector", {}), model, errors)
    tolerances = _parse_scalar_section(
        raw.get("tolerances"),
        _TOLERANCE_DEFAULTS,
        "tolerances",
        errors,
        {
            "degeneracy": lambda v: v is None or (_is_number(v) and v > 0),
            "s2": lambda v: _is_number(v) and v > 0,
            "overlap": lambda v: _is_number(v) and v > 0,
            "solver": lambda v: _is_number(v) and v > 0,
            "positivity_trials": lambda v: isinstance(v, int) and v >= 1,
        },
    )
    qmc = _parse_scalar_section(
        raw.get("qmc"),
        _QMC_DEFAULTS,
        "qmc",
        errors,
        {
            "beta": lambda v: _is_number(v) and v > 0,
            "M": lambda v: isinstance(v, int) and v >= 1,
            "walkers": lambda v: isinstance(v, int) and v >= 1,
            "seed": lambda v: isinstance(v, int) and not isinstance(v, bool),
            "measure_interval": lambda v: isinstance(v, int) and v >= 1,
            "equilibration": lambda v: v is None or (isinstance(v, int) and v >= 0),
            "symmetric": lambda v: isinstance(v, bool),
        },
    )
    outputs = _parse_scalar_section(
        raw.get("outputs"),
        {"dir": "out"},
        "outputs",
        errors,
        {"dir": lambda v: isinstance(v, str) and bool(v)},
    )
    if errors:
        raise ConfigError(errors)
    if qmc["beta"] is not None:
        qmc["beta"] = float(qmc["beta"])
    return ExperimentConfig(model, lattice, interactions, sector, tolerances, qmc, outputs)


def serialize_config(config: ExperimentConfig) -> str:
    return json.dumps(config.as_dict(), sort_keys=True, indent=2) + "\n"


def hopping_matrix(config: ExperimentConfig) -> np.ndarray:
    lat = config.lattice
    L = lat["L"]
    if "kind" in lat:
        t = np.zeros((L, L))
        bonds = []
        if lat["kind"] in ("chain", "ring"):
            bonds = [(i, i + 1) for i in range(L - 1)]
            if lat["kind"] == "ring" and L > 2:
                bonds.append((L - 1, 0))
        else:
            bonds = [(i, j) for i in range(L) for j in range(i + 1, L)]
        for i, j in bonds:
            t[i, j] = t[j, i] = lat["t"]
        return t if config.model != "two" else t.astype(complex)
    t = np.zeros((L, L), dtype=complex if config.model == "two" else float)
    for i, j, re, im in lat["bonds"]:
        val = complex(re, im) if config.model == "two" else re
        t[i - 1, j - 1] = val
        t[j - 1, i - 1] = np.conj(val) if config.model == "two" else re
    return t


def spec_from_config(config: ExperimentConfig):
    t = hopping_matrix(config)
    if config.model == "two":
        return ModelTwoSpec(t, config.interactions["U1"], config.interactions["U2"])
    return ModelOneSpec(t, config.interactions["U"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, payload) -> None:
    Path(path).write_text(
        json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    )


def write_trace_csv(path, trace) -> None:
    lines = [TRACE_HEADER]
    for p in trace:
        lines.append(f"{p.step},{p.estimator!r},{p.block_error!r},{p.total_weight!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def emit_report(results, out_dir) -> dict:
    """Write every entry of results into out_dir; returns name -> path.

    Values that look like a QMC trace (list of TracePoint) are written as
    CSV, everything else as schema-versioned JSON with stable key order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, payload in results.items():
        if isinstance(payload, list) and payload and hasattr(payload[0], "total_weight"):
            path = out / f"{name}.csv"
            write_trace_csv(path, payload)
        else:
            path = out / f"{name}.json"
            write_json(path, {"schema_version": SCHEMA_VERSION, **payload})
        paths[name] = str(path)
    return paths


def _spectrum_payload(op, solver_tol, seed):
    if op.dim <= DENSE_DIM_CAP:
        spect = dense_spectrum(op)
    else:
        spect = lanczos_lowest(op, k=min(6, op.dim), tol=solver_tol, seed=seed)
    vals = [float(v) for v in spect.eigenvalues[: min(len(spect.eigenvalues), 200)]]
    return spect, {
        "dim": op.dim,
        "eigenvalues": vals,
        "max_residual": float(spect.residuals.max()) if spect.residuals.size else 0.0,
        "converged": spect.converged,
    }


def _run_ed(config: ExperimentConfig, seed, tol):
    spec = spec_from_config(config)
    N = config.sector["N"]
    solver_tol = config.tolerances["solver"]
    sectors = []
    all_vals = []
    if config.model == "two":
        sz = config.sector["Sz"]
        if sz is None:
            blocks = [(nb, N - nb) for nb in range(N, -1, -1)]
        else:
            nb = (N + int(round(2 * sz))) // 2
            blocks = [(nb, N - nb)]
        for nb, nc in blocks:
            op = build_model2_hamiltonian(spec, nb, nc)
            _, payload = _spectrum_payload(op, solver_tol, seed)
            payload["sector"] = f"(N_b,N_c)=({nb},{nc})"
            sectors.append(payload)
            all_vals.extend(payload["eigenvalues"])
    else:
        op = build_model1_hamiltonian(spec, N)
        _, payload = _spectrum_payload(op, solver_tol, seed)
        payload["sector"] = f"N={N}"
        sectors.append(payload)
        all_vals.extend(payload["eigenvalues"])
    vals = np.sort(np.asarray(all_vals))
    ground = {
        "energy": float(vals[0]),
        "gap": float(vals[1] - vals[0]) if vals.size > 1 else None,
        "degeneracy": degeneracy_count(vals, tol) if vals.size > 1 else 1,
        "sector": min(sectors, key=lambda s: s["eigenvalues"][0])["sector"],
    }
    return {"sectors": sectors, "ground": ground}, True


def _run_verify(config: ExperimentConfig, seed, tol):
    spec = spec_from_config(config)
    N = config.sector["N"]
    trials = config.tolerances["positivity_trials"]
    if config.model == "variant":
        report = verify_mod.verify_nonnegative_hopping_uniqueness(spec, N, tol=tol, seed=seed)
        return {"uniqueness": report.to_dict()}, report.passed
    if N % 2 != 0 or N < 2:
        raise ConfigError(["sector.N: ground-state checks need N = 2n with n >= 1"])
    n = N // 2
    if config.model == "one":
        report = verify_mod.verify_unique_ground_state(spec, n, tol=tol, trials=trials, seed=seed)
        return {"uniqueness": report.to_dict()}, report.passed
    report = verify_mod.verify_two_component_ground_state(
        spec, n, tol=tol, trials=trials, seed=seed, s2_tol=config.tolerances["s2"]
    )
    singlet = verify_mod.verify_singlet_overlap(
        spec, n, tol=config.tolerances["overlap"], seed=seed
    )
    ok = report.passed and singlet.passed
    return {"uniqueness": report.to_dict(), "singlet": singlet.to_dict()}, ok


def _run_qmc(config: ExperimentConfig, seed):
    spec = spec_from_config(config)
    q = config.qmc
    schedule = ProjectionSchedule(
        beta=q["beta"],
        M=q["M"],
        equilibration_steps=q["equilibration"],
        measure_interval=q["measure_interval"],
    )
    result = run_projection(
        spec, config.sector["N"], schedule, q["walkers"], seed, symmetric=q["symmetric"]
    )
    return result


def _run_identities(config: ExperimentConfig, seed):
    spec = spec_from_config(config)
    tau = config.qmc["beta"] / config.qmc["M"]
    if config.model == "two":
        u_attr = float(min(config.interactions["U1"]))
        u_rep = float(max(config.interactions["U2"]))
        prefactor = 2 * spec.L + 1
        sector = (config.sector["N"] // 2, config.sector["N"] - config.sector["N"] // 2)
    else:
        us = config.interactions["U"]
        u_attr = float(min(us)) if min(us) < 0 else -1.0
        u_rep = 1.0
        prefactor = spec.L + 1
        sector = config.sector["N"]
    reports = {
        "hs_attractive": verify_mod.verify_hs_identity(u_attr, tau, kind="attractive"),
        "hs_imaginary": verify_mod.verify_hs_identity(u_rep, tau, kind="repulsive-imaginary"),
        "split": verify_mod.verify_split_identity(u_attr, 1e-3, prefactor),
        "quadratic": verify_mod.verify_quadratic_exponential(
            min(spec.L, 3), min(max(config.sector["N"], 1), 4), seed=seed
        ),
        "trotter": verify_mod.verify_trotter_scaling(spec, sector, beta=1.0),
    }
    payload = {name: rep.to_dict() for name, rep in reports.items()}
    return payload, all(rep.passed for rep in reports.values())


def run_command(cmd, config: ExperimentConfig, out_dir=None, seed=None, tol=None):
    """Dispatch one subcommand; returns (exit_status, artifact path map).

    Exit status 0 means every verdict passed; 1 means the run completed
    with a failing verdict; 2 means a structural or precondition error,
    recorded in error.json.
    """
    out = Path(out_dir) if out_dir is not None else Path(config.outputs["dir"])
    seed = config.qmc["seed"] if seed is None else int(seed)
    tol = config.tolerances["degeneracy"] if tol is None else float(tol)
    resolved = config.as_dict()
    try:
        if cmd == "ed":
            payload, ok = _run_ed(config, seed, tol)
            paths = emit_report({"spectrum": {**payload, "config": resolved}}, out)
        elif cmd == "verify":
            payload, ok = _run_verify(config, seed, tol)
            paths = emit_report(
                {"theorem_report": {**payload, "passed": ok, "config": resolved}}, out
            )
        elif cmd == "qmc":
            result = _run_qmc(config, seed)
            ok = result.summary["negative_overlaps"] == 0
            paths = emit_report(
                {
                    "trace": result.trace,
                    "qmc_summary": {**result.summary, "passed": ok, "config": resolved},
                },
                out,
            )
        elif cmd == "identities":
            payload, ok = _run_identities(config, seed)
            paths = emit_report(
                {"identities": {**payload, "passed": ok, "config": resolved}}, out
            )
        else:
            raise ValueError(f"unknown command: {cmd!r}")
    except (verify_mod.PreconditionError, ConfigError, ValueError, TypeError) as exc:
        paths = emit_report(
            {
                "error": {
                    "command": cmd,
                    "type": type(exc).__name__,
                    "message": str(exc),
                    "config": resolved,
                }
            },
            out,
        )
        return 2, paths
    return (0 if ok else 1), paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bhub", description="Lattice boson ground-state toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in [
        ("ed", "diagonalize the configured sector(s)"),
        ("verify", "run the ground-state checks"),
        ("qmc", "run the projection Monte Carlo"),
        ("identities", "check the decoupling and splitting identities"),
    ]:
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--tol", type=float, default=None, help="override the degeneracy tolerance")
    args = parser.parse_args(argv)
    try:
        config = parse_config(Path(args.config).read_text())
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    status, paths = run_command(
        args.command, config, out_dir=args.out, seed=args.seed, tol=args.tol
    )
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    print(f"status: {'pass' if status == 0 else 'fail' if status == 1 else 'error'}")
    return status
