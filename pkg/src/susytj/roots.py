"""Numerical solution of the coupled Bethe equations and spectrum matching."""

from __future__ import annotations

import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import table_params
from .reference import reference_rows
from .transfer import SpectrumED, TransferFamily
from .tq import BetheRootSet, PoleError, TQContext, bae_residuals, energy, lambda_tq


@dataclass(frozen=True)
class SolveConfig:
    max_iter: int = 60
    min_damping: float = 2.0**-10
    tol: float = 1e-11
    dedupe_radius: float = 1e-6
    fd_step: float = 1e-7
    seeds: str = "table+random"     # any of "table", "random", "file:<path>", joined by '+'
    random_budget: int = 60
    box_re: float = 3.0
    box_im: float = 6.0
    perturb_rounds: int = 1
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.tol <= 0 or self.dedupe_radius <= 0 or self.fd_step <= 0:
            raise ValueError("tolerances and the finite-difference step must be positive")
        if self.dedupe_radius <= self.tol:
            raise ValueError(f"dedupe radius {self.dedupe_radius} must exceed the residual tolerance {self.tol}")
        if not 0 < self.min_damping <= 1:
            raise ValueError(f"min_damping must lie in (0, 1], got {self.min_damping}")

    @property
    def seed_sources(self) -> tuple[str, ...]:
        return tuple(s for s in self.seeds.split("+") if s)

    def worker_count(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        env = os.environ.get("BETHE_TJ_THREADS")
        return max(1, int(env)) if env else min(8, os.cpu_count() or 1)


@dataclass
class RootSolution:
    roots: BetheRootSet
    residual: float
    energy: complex
    converged: bool
    iterations: int
    message: str = ""
    history: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        out = self.roots.to_dict()
        out.update(residual=self.residual, energy=[self.energy.real, self.energy.imag],
                   converged=self.converged, iterations=self.iterations)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RootSolution":
        return cls(BetheRootSet.from_dict(data), float(data["residual"]), complex(*data["energy"]),
                   bool(data.get("converged", True)), int(data.get("iterations", 0)))


@dataclass
class LevelMatch:
    level: int
    ed_energy: complex
    solution: RootSolution | None = None
    energy_error: float = np.inf
    lambda_error: float = np.inf
    ambiguous: bool = False

    @property
    def matched(self) -> bool:
        return self.solution is not None


@dataclass
class MatchReport:
    levels: list[LevelMatch]
    unmatched_solutions: list[RootSolution] = field(default_factory=list)
    probe_points: tuple[complex, ...] = ()

    @property
    def n_matched(self) -> int:
        return sum(m.matched for m in self.levels)

    @property
    def coverage(self) -> float:
        return self.n_matched / len(self.levels) if self.levels else 0.0

    def max_energy_error(self) -> float:
        errs = [m.energy_error for m in self.levels if m.matched]
        return max(errs) if errs else 0.0

    def max_lambda_error(self) -> float:
        errs = [m.lambda_error for m in self.levels if m.matched]
        return max(errs) if errs else 0.0


# -- Newton ---------------------------------------------------------------------

def _residual_vector(x: np.ndarray, ctx: TQContext) -> np.ndarray:
    r2, r1 = bae_residuals(BetheRootSet.from_vector(x), ctx)
    return np.concatenate([r2, r1])


def _jacobian(x: np.ndarray, ctx: TQContext, step: float) -> np.ndarray:
    n = len(x)
    jac = np.empty((n, n), dtype=complex)
    for k in range(n):
        h = step * max(1.0, abs(x[k]))
        e = np.zeros(n, dtype=complex)
        e[k] = h
        jac[:, k] = (_residual_vector(x + e, ctx) - _residual_vector(x - e, ctx)) / (2 * h)
    return jac


def _safe_norm(x: np.ndarray, ctx: TQContext) -> float:
    with np.errstate(all="ignore"):
        try:
            val = float(np.max(np.abs(_residual_vector(x, ctx))))
        except ZeroDivisionError:
            return np.inf
    return val if np.isfinite(val) else np.inf


def _finish(x, res, it, ctx, cfg, message="", history=()) -> RootSolution:
    roots = BetheRootSet.from_vector(x)
    history = list(history)
    try:
        e = energy(roots, ctx)
    except PoleError as exc:
        return RootSolution(roots, res, complex(np.nan), False, it, str(exc), history)
    bad = degenerate_reason(roots, ctx.eta)
    if bad:
        return RootSolution(roots, res, e, False, it, bad, history)
    return RootSolution(roots, res, e, res <= cfg.tol, it, message, history)


def degenerate_reason(roots: BetheRootSet, eta: complex, radius: float = 1e-6) -> str:
    """Non-empty when two roots coincide up to symmetry or a root sits on a fixed point."""
    xs = [x + eta / 2 for x in roots.u]
    # fixed points of u -> -u - eta and nu -> -nu give double zeros of Q
    for x, u in zip(xs, roots.u):
        if abs(x) < radius:
            return f"level-1 root {u!r} sits on the fixed point -eta/2"
    for v in roots.nu:
        if abs(v) < radius:
            return f"level-2 root {v!r} sits on the fixed point 0"
    for a, b in itertools.combinations(range(len(xs)), 2):
        if min(abs(xs[a] - xs[b]), abs(xs[a] + xs[b])) < radius:
            return f"coincident level-1 roots {roots.u[a]!r}, {roots.u[b]!r}"
    for a, b in itertools.combinations(range(len(roots.nu)), 2):
        va, vb = roots.nu[a], roots.nu[b]
        if min(abs(va - vb), abs(va + vb)) < radius:
            return f"coincident level-2 roots {va!r}, {vb!r}"
    return ""


def newton_refine(seed: BetheRootSet, ctx: TQContext, cfg: SolveConfig = SolveConfig()) -> RootSolution:
    """Damped Newton on the 2M complex Bethe residuals.

    A step is accepted only if it lowers the max-residual; otherwise it is
    halved down to ``cfg.min_damping``.
    """
    x = seed.as_vector()
    if seed.M == 0:
        return _finish(x, 0.0, 0, ctx, cfg)
    res = _safe_norm(x, ctx)
    if not np.isfinite(res):
        return RootSolution(seed, np.inf, complex(np.nan), False, 0, "seed sits on a pole of the Bethe equations")
    hist = [res]
    for it in range(cfg.max_iter):
        if res <= cfg.tol:
            return _finish(x, res, it, ctx, cfg, history=hist)
        with np.errstate(all="ignore"):
            jac = _jacobian(x, ctx, cfg.fd_step)
            f = _residual_vector(x, ctx)
        if not np.all(np.isfinite(jac)):
            return _finish(x, res, it, ctx, cfg, "non-finite Jacobian", hist)
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, f, rcond=None)[0]
        damping = 1.0
        while damping >= cfg.min_damping:
            trial = x - damping * step
            tres = _safe_norm(trial, ctx)
            if tres < res:
                break
            damping /= 2
        else:
            return _finish(x, res, it, ctx, cfg, "stalled: no damped step lowers the residual", hist)
        x, res = trial, tres
        hist.append(res)
        if np.max(np.abs(x)) > 1e6:
            return _finish(x, res, it + 1, ctx, cfg, "diverged", hist)
    msg = "" if res <= cfg.tol else "max iterations exceeded"
    return _finish(x, res, cfg.max_iter, ctx, cfg, msg, hist)


# -- symmetry reduction ---------------------------------------------------------

def _canonical_point(z: complex, tie: float = 1e-10) -> complex:
    """Representative of {z, -z}: positive real part, or non-negative imaginary part on the axis."""
    if z.real < -tie or (abs(z.real) <= tie and z.imag < 0):
        return -z
    return z


def _sort_key(z: complex) -> tuple[float, float]:
    return (round(z.real, 9), round(z.imag, 9))


def canonicalize(roots: BetheRootSet, eta: complex) -> BetheRootSet:
    """Fold u -> -u - eta and nu -> -nu onto canonical representatives and sort."""
    xs = sorted((_canonical_point(x + eta / 2) for x in roots.u), key=_sort_key)
    vs = sorted((_canonical_point(v) for v in roots.nu), key=_sort_key)
    return BetheRootSet(tuple(x - eta / 2 for x in xs), tuple(vs))


def _set_distance(a: tuple[complex, ...], b: tuple[complex, ...]) -> float:
    if len(a) != len(b):
        return np.inf
    if not a:
        return 0.0
    return min(max(abs(x - y) for x, y in zip(a, perm)) for perm in itertools.permutations(b))


def root_distance(a: BetheRootSet, b: BetheRootSet, eta: complex) -> float:
    ca, cb = canonicalize(a, eta), canonicalize(b, eta)
    return max(_set_distance(ca.u, cb.u), _set_distance(ca.nu, cb.nu))


_DEDUPE_PROBES = (0.3141 + 0.2718j, -0.577 + 0.1234j, 0.05 - 0.433j)


def same_solution(a: BetheRootSet, b: BetheRootSet, ctx: TQContext, radius: float,
                  lambda_tol: float = 1e-8) -> bool:
    if a.M != b.M or root_distance(a, b, ctx.eta) > radius:
        return False
    for u in _DEDUPE_PROBES:
        la, lb = lambda_tq(u, a, ctx), lambda_tq(u, b, ctx)
        if abs(la - lb) > lambda_tol * max(1.0, abs(la)):
            return False
    return True


def dedupe(solutions: list[RootSolution], ctx: TQContext, radius: float = 1e-6) -> list[RootSolution]:
    """Keep the lowest-residual representative of each symmetry class, in canonical form."""
    kept: list[RootSolution] = []
    for sol in sorted(solutions, key=lambda s: s.residual):
        if not any(same_solution(sol.roots, k.roots, ctx, radius) for k in kept):
            kept.append(replace(sol, roots=canonicalize(sol.roots, ctx.eta)))
    return kept


# -- seeds and search -------------------------------------------------------------

def params_match_table(ctx: TQContext) -> bool:
    p = ctx.params
    if p.L not in (2, 3) or not p.is_homogeneous:
        return False
    ref = table_params(p.L)
    keys = ("eta", "zeta", "c", "c1", "zetap", "cp", "c1p", "mu")
    return all(abs(getattr(p, k) - getattr(ref, k)) < 1e-12 for k in keys)


def table_seeds(M: int, ctx: TQContext) -> list[BetheRootSet]:
    if not params_match_table(ctx):
        return []
    return [row.roots for row in reference_rows(ctx.params.L) if row.M == M]


def load_seed_file(path: str) -> list[BetheRootSet]:
    with open(path) as fh:
        data = json.load(fh)
    return [BetheRootSet.from_dict(d) for d in data]


def random_seeds(M: int, ctx: TQContext, count: int, rng: np.random.Generator,
                 box_re: float = 3.0, box_im: float = 6.0) -> list[BetheRootSet]:
    """Random seeds mixing uniform boxes with the symmetry lines seen in solved spectra.

    Level-1 roots favour the line Re u = -eta/2 and the real axis; level-2
    roots favour the imaginary and real axes and conjugate pairs.
    """
    eta = ctx.eta
    out = []

    def scale_draw(width):
        # log-uniform magnitudes from 0.02 up to the box size
        return np.exp(rng.uniform(np.log(0.02), np.log(width))) * rng.choice([-1, 1])

    for _ in range(count):
        u = []
        for _ in range(M):
            kind = rng.integers(4)
            if kind == 0:
                u.append(-eta / 2 + 1j * scale_draw(box_im))
            elif kind == 1:
                u.append(complex(scale_draw(box_re)))
            else:
                u.append(complex(rng.uniform(-box_re, box_re), rng.uniform(-box_im, box_im)) * rng.uniform(0.05, 1))
        nu = []
        while len(nu) < M:
            kind = rng.integers(4)
            if kind == 0 and M - len(nu) >= 2:
                z = complex(rng.uniform(-box_re / 2, box_re / 2), scale_draw(box_im))
                nu += [z, z.conjugate()]
            elif kind == 1:
                nu.append(1j * scale_draw(box_im))
            elif kind == 2:
                nu.append(complex(scale_draw(box_re)))
            else:
                nu.append(complex(rng.uniform(-box_re, box_re), rng.uniform(-box_im, box_im)))
        out.append(BetheRootSet(u, nu))
    return out


def _perturbed(roots: BetheRootSet, rng: np.random.Generator, scale: float) -> BetheRootSet:
    M = roots.M
    noise = scale * (rng.standard_normal(2 * M) + 1j * rng.standard_normal(2 * M))
    return BetheRootSet.from_vector(roots.as_vector() * (1 + noise) + noise)


def _run_pool(seeds: list[BetheRootSet], ctx: TQContext, cfg: SolveConfig) -> list[RootSolution]:
    workers = cfg.worker_count()
    if workers == 1 or len(seeds) < 4:
        return [newton_refine(s, ctx, cfg) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: newton_refine(s, ctx, cfg), seeds))


def multistart_search(M: int, ctx: TQContext, cfg: SolveConfig = SolveConfig(),
                      extra_seeds: list[BetheRootSet] | None = None) -> list[RootSolution]:
    """Converged, canonical, deduplicated solutions with M level-1 roots."""
    if M > ctx.params.L:
        raise ValueError(f"M = {M} exceeds the chain length {ctx.params.L}")
    if M == 0:
        return [newton_refine(BetheRootSet(), ctx, cfg)]
    rng = np.random.default_rng([cfg.seed, M])
    seeds = list(extra_seeds or [])
    for src in cfg.seed_sources:
        if src == "table":
            seeds += table_seeds(M, ctx)
        elif src == "random":
            seeds += random_seeds(M, ctx, cfg.random_budget, rng, cfg.box_re, cfg.box_im)
        elif src.startswith("file:"):
            seeds += [s for s in load_seed_file(src[5:]) if s.M == M]
        else:
            raise ValueError(f"unknown seed source {src!r}")
    found = [s for s in _run_pool(seeds, ctx, cfg) if s.converged]
    found = dedupe(found, ctx, cfg.dedupe_radius)
    for _ in range(cfg.perturb_rounds):
        if not found:
            break
        probes = [_perturbed(s.roots, rng, 0.05) for s in found for _ in range(2)]
        more = [s for s in _run_pool(probes, ctx, cfg) if s.converged]
        found = dedupe(found + more, ctx, cfg.dedupe_radius)
    return sorted(found, key=lambda s: (s.energy.real, s.energy.imag))


# -- matching against exact diagonalization ------------------------------------------

def _level_groups(values: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        for g in groups:
            if abs(values[g[0]] - v) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def restricted_transfer_eigs(family: TransferFamily, vectors: np.ndarray, u: complex) -> np.ndarray:
    """Eigenvalues of t(u) restricted to the span of ``vectors`` (assumed invariant)."""
    t_v = family(u) @ vectors
    small = np.linalg.lstsq(vectors, t_v, rcond=None)[0]
    return np.linalg.eigvals(small)


def match_spectrum(solutions: list[RootSolution], ed: SpectrumED, ctx: TQContext,
                   family: TransferFamily | None = None, tol: float = 1e-6, lambda_rtol: float = 1e-6,
                   n_probe: int = 3, seed: int = 0, degeneracy_tol: float = 1e-7) -> MatchReport:
    """Greedy nearest-energy assignment of Bethe solutions to ED levels.

    With a transfer family and ED eigenvectors, each match is certified by
    comparing Lambda(u) with t(u) restricted to the matched ED eigenspace.
    """
    levels = [LevelMatch(i, complex(e)) for i, e in enumerate(ed.eigenvalues)]
    groups = _level_groups(ed.eigenvalues, degeneracy_tol)
    rng = np.random.default_rng(seed)
    probes = tuple(complex(a, b) for a, b in rng.uniform(-0.8, 0.8, (n_probe, 2)))

    pairs = sorted(((abs(s.energy - lv.ed_energy), si, lv.level)
                    for si, s in enumerate(solutions) for lv in levels), key=lambda t: t[0])
    used_sol, used_lvl = set(), set()
    for dist, si, li in pairs:
        if dist > tol:
            break
        if si in used_sol or li in used_lvl:
            continue
        used_sol.add(si)
        used_lvl.add(li)
        m = levels[li]
        m.solution, m.energy_error = solutions[si], float(dist)
        near = [lv for lv in levels if lv.level != li and abs(solutions[si].energy - lv.ed_energy) <= tol]
        m.ambiguous = any(lv.level not in next(g for g in groups if li in g) for lv in near)

    if family is not None and ed.eigenvectors is not None:
        for m in levels:
            if not m.matched:
                continue
            group = next(g for g in groups if m.level in g)
            vecs = ed.eigenvectors[:, group]
            worst = 0.0
            for u in probes:
                lam = lambda_tq(u, m.solution.roots, ctx)
                eig = restricted_transfer_eigs(family, vecs, u)
                worst = max(worst, float(np.min(np.abs(eig - lam)) / max(abs(lam), 1e-300)))
            m.lambda_error = worst
    unmatched = [s for si, s in enumerate(solutions) if si not in used_sol]
    return MatchReport(levels, unmatched, probes)


def solutions_to_json(solutions: list[RootSolution]) -> str:
    return json.dumps([s.to_dict() for s in solutions], indent=1, sort_keys=True)


def solutions_from_json(text: str) -> list[RootSolution]:
    return [RootSolution.from_dict(d) for d in json.loads(text)]
