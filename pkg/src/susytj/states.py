"""Nested algebraic Bethe states and their eigenvector certificates."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .graded import FERMIONIC_2, aux_blocks, embed
from .kernels import Gauges, ModelParams, build_gauges, nested_K_minus
from .transfer import (TransferFamily, double_row_blocks, hamiltonian_from_transfer, nested_monodromies,
                       nested_transfer_pregauge)
from .tq import BetheRootSet, TQContext, lambda_nested, lambda_tq, energy

ZERO_NORM_RTOL = 1e-10


class ZeroStateError(ValueError):
    """The Bethe construction collapsed to the zero vector."""


@dataclass(frozen=True)
class NestedState:
    M: int
    amplitudes: np.ndarray

    def component(self, indices: Sequence[int]) -> complex:
        """F^{a1...aM} with a_j in {1, 2}."""
        flat = 0
        for a in indices:
            flat = 2 * flat + (a - 1)
        return complex(self.amplitudes[flat])


@dataclass(frozen=True)
class StateVector:
    L: int
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        """Unit norm with the largest amplitude made real and positive."""
        v = self.amplitudes / self.norm
        k = int(np.argmax(np.abs(v)))
        v = v * (abs(v[k]) / v[k])
        v[k] = abs(v[k])
        return StateVector(self.L, v)

    def to_dict(self) -> dict:
        return {"L": self.L,
                "basis": "lexicographic over sites 1..L, local order (empty, down, up)",
                "amplitudes": [[z.real, z.imag] for z in self.amplitudes]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "StateVector":
        return cls(int(data["L"]), np.array([complex(*z) for z in data["amplitudes"]]))


@dataclass
class EigenReport:
    points: list[complex]
    residuals: list[float]
    hamiltonian_residual: float | None = None

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


# -- reference states ---------------------------------------------------------

def reference_state(L: int) -> StateVector:
    v = np.zeros(3**L, dtype=complex)
    v[0] = 1
    return StateVector(L, v)


def nested_reference_state(M: int) -> NestedState:
    v = np.zeros(2**M, dtype=complex)
    v[0] = 1
    return NestedState(M, v)


# -- level 2 --------------------------------------------------------------------

def diagonal_gauges() -> Gauges:
    """Constant gauges for diagonal boundaries: a swap puts K-bar- in the gauged diagonal order."""
    swap = np.array([[0, 1], [1, 0]], dtype=complex)
    return Gauges(swap, np.eye(2, dtype=complex), 0.0, 0.0)


def gauges_for(p: ModelParams) -> Gauges:
    return diagonal_gauges() if p.is_diagonal else build_gauges(p)


def gauged_monodromy(lam: complex, lams: Sequence[complex], ctx: TQContext,
                     gauges: Gauges | None = None) -> dict[str, np.ndarray]:
    """Blocks A, B, C, D of g+ Tbar (g- Kbar- g-^-1) Tbar^ g+^-1 on the nested chain."""
    p = ctx.params
    g = gauges or gauges_for(p)
    M = len(lams)
    n = M + 1
    T, That = nested_monodromies(lam, lams, p.eta)
    gm_inv = np.linalg.inv(g.g_minus)
    k = g.g_minus @ nested_K_minus(lam, p) @ gm_inv
    on0 = lambda x: embed(x, [0], n, FERMIONIC_2)
    U = on0(g.g_plus) @ T @ on0(k) @ That @ on0(np.linalg.inv(g.g_plus))
    b = aux_blocks(U, 2)
    return {"A": b[0][0], "B": b[0][1], "C": b[1][0], "D": b[1][1]}


def _check_nonzero(vec: np.ndarray, scale: float, what: str):
    nrm = np.linalg.norm(vec)
    if nrm <= ZERO_NORM_RTOL * max(scale, 1e-300):
        raise ZeroStateError(f"{what} has norm {nrm:.3e} against intermediate scale {scale:.3e}")


def build_nested_state(roots: BetheRootSet, ctx: TQContext, gauges: Gauges | None = None,
                       order: Sequence[int] | None = None) -> NestedState:
    """Apply B(w_1)...B(w_M) to |0> (B(w_M) first), then rotate sitewise by (g-)^-1."""
    M = roots.M
    if M == 0:
        return NestedState(0, np.ones(1, dtype=complex))
    g = gauges or gauges_for(ctx.params)
    lams = roots.lams(ctx.eta)
    ws = roots.w(ctx.eta)
    order = list(range(M)) if order is None else list(order)
    v = nested_reference_state(M).amplitudes
    # a null state is judged against the largest norm the B-product could reach
    scale = 1.0
    for j in reversed(order):
        B = gauged_monodromy(ws[j], lams, ctx, g)["B"]
        scale *= np.linalg.norm(B, 2)
        v = B @ v
    _check_nonzero(v, scale, "nested state")
    rot = reduce(np.kron, [np.linalg.inv(g.g_minus)] * M)
    return NestedState(M, rot @ v)


def nested_residual(state: NestedState, roots: BetheRootSet, ctx: TQContext,
                    points: Sequence[complex]) -> float:
    """max_u |t^(u)F - Lambda^(u)F| / |F| on the level-2 chain."""
    F = state.amplitudes
    worst = 0.0
    for u in points:
        t = nested_transfer_pregauge(u, roots.u, ctx.params)
        lam = lambda_nested(u + ctx.eta / 2, roots, ctx)
        worst = max(worst, float(np.linalg.norm(t @ F - lam * F) / np.linalg.norm(F) / max(1.0, abs(lam))))
    return worst


# -- level 1 --------------------------------------------------------------------

def assemble_state(roots: BetheRootSet, nested: NestedState, ctx: TQContext) -> StateVector:
    """sum_a F^{a1..aM} B_{a1}(u1) ... B_{aM}(uM) |Psi0>."""
    p = ctx.params
    L, M = p.L, roots.M
    psi0 = reference_state(L).amplitudes
    if M == 0:
        return StateVector(L, psi0 * nested.amplitudes[0])
    blocks = [double_row_blocks(x, p) for x in roots.u]
    B = [(b["B1"], b["B2"]) for b in blocks]
    psi = np.zeros_like(psi0)
    scale = 0.0
    for idx, a in enumerate(itertools.product((0, 1), repeat=M)):
        if nested.amplitudes[idx] == 0:
            continue
        v = psi0
        for j in range(M - 1, -1, -1):
            v = B[j][a[j]] @ v
        term = nested.amplitudes[idx] * v
        scale = max(scale, float(np.max(np.abs(term))))
        psi = psi + term
    _check_nonzero(psi, scale, "Bethe state")
    return StateVector(L, psi)


def bethe_state(roots: BetheRootSet, ctx: TQContext) -> StateVector:
    return assemble_state(roots, build_nested_state(roots, ctx), ctx)


def verify_eigenstate(state: StateVector, family: TransferFamily, lam: Callable[[complex], complex],
                      points: Sequence[complex], hamiltonian: np.ndarray | None = None,
                      energy_value: complex | None = None) -> EigenReport:
    """Relative residuals |t(u)psi - Lambda(u)psi| / (|psi| |Lambda(u)|) on a u-grid."""
    psi = state.amplitudes
    nrm = np.linalg.norm(psi)
    res = []
    for u in points:
        lv = lam(u)
        res.append(float(np.linalg.norm(family(u) @ psi - lv * psi) / nrm / max(abs(lv), 1e-300)))
    hres = None
    if hamiltonian is not None and energy_value is not None:
        hres = float(np.linalg.norm(hamiltonian @ psi - energy_value * psi) / nrm)
    return EigenReport(list(points), res, hres)


def certify_roots(roots: BetheRootSet, ctx: TQContext, family: TransferFamily, points: Sequence[complex],
                  hamiltonian: np.ndarray | None = None) -> tuple[StateVector, EigenReport, float]:
    """Build the state for a root set and return it with its transfer and nested residuals."""
    nested = build_nested_state(roots, ctx)
    nres = nested_residual(nested, roots, ctx, points) if roots.M else 0.0
    state = assemble_state(roots, nested, ctx)
    if hamiltonian is None:
        hamiltonian = hamiltonian_from_transfer(ctx.params, family)
    rep = verify_eigenstate(state, family, lambda u: lambda_tq(u, roots, ctx), points,
                            hamiltonian, energy(roots, ctx))
    return state, rep, nres


def gram_matrix(states: Sequence[StateVector]) -> np.ndarray:
    V = np.stack([s.normalized().amplitudes for s in states], axis=1)
    return V.conj().T @ V
