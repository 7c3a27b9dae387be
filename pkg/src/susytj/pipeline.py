"""Batch stages shared by the command line and the scripts."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .kernels import RELATIONS, ModelParams, RelationReport, check_relation
from .roots import MatchReport, RootSolution, SolveConfig, match_spectrum, multistart_search, params_match_table
from .states import ZeroStateError, certify_roots
from .tq import TQContext
from .transfer import (MAX_TRANSFER_SITES, TransferFamily, build_transfer, diagonalize, hamiltonian_direct,
                       hamiltonian_from_transfer, sort_spectrum)

MODES = ("verify", "ed", "roots", "states", "full")
DEFAULT_SEED = 20240607
STATE_POINTS = 5


@dataclass
class RunConfig:
    params: ModelParams
    mode: str = "full"
    solver: SolveConfig = field(default_factory=SolveConfig)
    M_list: tuple[int, ...] | None = None
    out_dir: Path = Path("out")
    root_digits: int = 4
    energy_digits: int = 6

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != "verify" and self.params.L > MAX_TRANSFER_SITES:
            raise ValueError(f"mode {self.mode} needs dense matrices; L = {self.params.L} exceeds {MAX_TRANSFER_SITES}")
        if self.M_list is None:
            self.M_list = tuple(range(self.params.L + 1))
        bad = [M for M in self.M_list if not 0 <= M <= self.params.L]
        if bad:
            raise ValueError(f"M values {bad} outside 0..{self.params.L}")


def load_config(path: str | Path) -> tuple[ModelParams, tuple[int, ...] | None]:
    """Read a JSON parameter file; bare names resolve to the shipped configs."""
    p = Path(path)
    if p.exists():
        text = p.read_text()
    else:
        name = p.name if p.suffix else p.name + ".json"
        text = resources.files("susytj").joinpath("configs", name).read_text()
    data = json.loads(text)
    M_list = data.pop("M_list", None)
    return ModelParams.from_dict(data), None if M_list is None else tuple(M_list)


@dataclass
class Gate:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


# -- stages ---------------------------------------------------------------------

def verify_relations(p: ModelParams, seed: int = 0, tol: float = 1e-10) -> list[RelationReport]:
    return [check_relation(name, p, tol=tol, seed=seed) for name in RELATIONS]


def commutativity(family: TransferFamily, n_pairs: int = 10, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1, 1, (n_pairs, 4))
    return max(family.commutator_defect(complex(a, b), complex(c, d)) for a, b, c, d in z)


def hamiltonian_spectra(p: ModelParams, family: TransferFamily | None = None):
    ed_direct = diagonalize(hamiltonian_direct(p), keep_vectors=True, source="direct")
    ed_transfer = diagonalize(hamiltonian_from_transfer(p, family), source="transfer")
    return ed_direct, ed_transfer


def spectrum_mismatch(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a)[sort_spectrum(a)]
    b = np.asarray(b)[sort_spectrum(b)]
    return float(np.max(np.abs(a - b)))


def solve_roots(ctx: TQContext, cfg: SolveConfig, M_list) -> list[RootSolution]:
    sols = []
    for M in M_list:
        sols += multistart_search(M, ctx, cfg)
    return sorted(sols, key=lambda s: (round(s.energy.real, 9), s.roots.M))


@dataclass
class StateCheck:
    t_residual: float
    h_residual: float
    nested_residual: float
    error: str = ""


def check_states(solutions: list[RootSolution], ctx: TQContext, family: TransferFamily,
                 seed: int = 0) -> list[StateCheck]:
    rng = np.random.default_rng(seed)
    pts = [complex(a, b) for a, b in rng.uniform(-0.8, 0.8, (STATE_POINTS, 2))]
    H = hamiltonian_from_transfer(ctx.params, family)
    out = []
    for s in solutions:
        try:
            _, rep, nres = certify_roots(s.roots, ctx, family, pts, H)
            out.append(StateCheck(rep.max_residual, rep.hamiltonian_residual, nres))
        except (ZeroStateError, np.linalg.LinAlgError, ValueError) as exc:
            out.append(StateCheck(np.inf, np.inf, np.inf, str(exc)))
    return out


# -- export ----------------------------------------------------------------------

def _fmt_root(z: complex, digits: int) -> str:
    re, im = round(z.real, digits) + 0.0, round(z.imag, digits) + 0.0
    return f"{re:.{digits}f}{im:+.{digits}f}i"


def roots_csv(solutions: list[RootSolution], width: int, states: list[StateCheck] | None = None,
              root_digits: int = 4, energy_digits: int = 6) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = (["n"] + [f"u_{k + 1}" for k in range(width)] + [f"nu_{k + 1}" for k in range(width)]
              + ["E_n", "residual"])
    if states is not None:
        header += ["t_residual", "H_residual"]
    w.writerow(header)
    for n, s in enumerate(solutions, 1):
        pad = [""] * (width - s.roots.M)
        row = ([n] + [_fmt_root(z, root_digits) for z in s.roots.u] + pad
               + [_fmt_root(z, root_digits) for z in s.roots.nu] + pad
               + [f"{round(s.energy.real, energy_digits) + 0.0:.{energy_digits}f}", f"{s.residual:.1e}"])
        if states is not None:
            row += [f"{states[n - 1].t_residual:.1e}", f"{states[n - 1].h_residual:.1e}"]
        w.writerow(row)
    return buf.getvalue()


def solutions_payload(solutions: list[RootSolution], p: ModelParams, seed: int) -> dict:
    return {"seed": seed, "params": p.to_dict(), "solutions": [s.to_dict() for s in solutions]}


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def match_summary(rep: MatchReport) -> dict:
    return {"coverage": rep.coverage, "matched": rep.n_matched, "levels": len(rep.levels),
            "max_energy_error": rep.max_energy_error(), "max_lambda_error": rep.max_lambda_error(),
            "ambiguous": [m.level for m in rep.levels if m.ambiguous],
            "unmatched_solutions": len(rep.unmatched_solutions)}


# -- orchestration ---------------------------------------------------------------

def run(cfg: RunConfig, log=print) -> tuple[list[Gate], dict]:
    """Execute one mode, write artifacts to ``cfg.out_dir`` and return the gates."""
    p = cfg.params
    seed = cfg.solver.seed
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gates: list[Gate] = []
    summary: dict = {"mode": cfg.mode, "seed": seed, "params": p.to_dict()}

    def write(name, text):
        (out / name).write_text(text)
        summary.setdefault("artifacts", []).append(name)

    family = None
    if cfg.mode in ("verify", "full"):
        reports = verify_relations(p, seed)
        write("relations.json", dump_json([r.to_dict() for r in reports]))
        for r in reports:
            gates.append(Gate(f"relation {r.relation}", r.passed, f"max residual {r.max_residual:.2e}"))
        if p.L <= MAX_TRANSFER_SITES:
            family = build_transfer(p)
            defect = commutativity(family, seed=seed)
            gates.append(Gate("commutativity", defect <= 1e-9, f"relative defect {defect:.2e}"))

    ed = None
    if cfg.mode in ("ed", "full", "roots", "states"):
        family = family or build_transfer(p)
        ed, ed_t = hamiltonian_spectra(p, family)
        if cfg.mode in ("ed", "full"):
            write("spectrum_direct.csv", ed.to_csv())
            write("spectrum_transfer.csv", ed_t.to_csv())
            gap = spectrum_mismatch(ed.eigenvalues, ed_t.eigenvalues)
            summary["hamiltonian_mismatch"] = gap
            gates.append(Gate("hamiltonian routes", gap <= 1e-8, f"max spectral mismatch {gap:.2e}"))

    if cfg.mode in ("roots", "states", "full"):
        ctx = TQContext(p)
        sols = solve_roots(ctx, cfg.solver, cfg.M_list)
        bad = [s for s in sols if not s.converged]
        gates.append(Gate("bethe residuals", not bad, f"{len(sols)} solutions, max residual "
                          f"{max((s.residual for s in sols), default=0.0):.1e}"))
        states = check_states(sols, ctx, family, seed) if cfg.mode in ("states", "full") else None
        width = max(cfg.M_list, default=0)
        write("roots.csv", roots_csv(sols, width, states, cfg.root_digits, cfg.energy_digits))
        write("roots.json", dump_json(solutions_payload(sols, p, seed)))
        rep = match_spectrum(sols, ed, ctx, family, seed=seed)
        summary["match"] = match_summary(rep)
        gates.append(Gate("energies match ED", rep.max_energy_error() <= 1e-8 and not rep.unmatched_solutions,
                          f"{rep.n_matched} matched, {len(rep.unmatched_solutions)} unmatched, "
                          f"max |dE| {rep.max_energy_error():.1e}"))
        gates.append(Gate("T-Q certificate", rep.max_lambda_error() <= 1e-6,
                          f"max relative Lambda error {rep.max_lambda_error():.1e}"))
        full_space = set(cfg.M_list) == set(range(p.L + 1))
        if "table" in cfg.solver.seed_sources and params_match_table(ctx) and full_space:
            gates.append(Gate("coverage", rep.coverage == 1.0, f"{rep.n_matched}/{len(rep.levels)}"))
        else:
            log(f"coverage {rep.n_matched}/{len(rep.levels)} (reported, not gated)")
        if states is not None:
            worst_t = max((s.t_residual for s in states), default=0.0)
            worst_h = max((s.h_residual for s in states), default=0.0)
            gates.append(Gate("bethe states", worst_t <= 1e-7 and worst_h <= 1e-6,
                              f"max t residual {worst_t:.1e}, max H residual {worst_h:.1e}"))

    summary["gates"] = [{"name": g.name, "pass": g.passed, "detail": g.detail} for g in gates]
    summary["passed"] = all(g.passed for g in gates)
    summary.setdefault("artifacts", []).append("summary.json")
    (out / "summary.json").write_text(dump_json(summary))
    return gates, summary
