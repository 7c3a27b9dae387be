"""Monodromy and transfer matrices, the two Hamiltonian routes, dense ED."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .graded import (BFF, FERMIONIC_2, OperatorPoly, aux_blocks, chebyshev_nodes, embed,
                     poly_interpolate, super_trace)
from .kernels import (ModelParams, build_K_minus, build_K_plus, build_R, build_r_nested,
                      nested_K_minus, nested_K_minus_pregauge, nested_K_plus,
                      nested_K_plus_pregauge)

MAX_TRANSFER_SITES = 6
MAX_ED_SITES = 8


def _check_transfer_size(L: int):
    if L > MAX_TRANSFER_SITES:
        raise ValueError(f"dense transfer matrices are capped at L = {MAX_TRANSFER_SITES}, got {L}")


def monodromies(u: complex, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Row-to-row monodromies T0(u) and T^0(u) on aux (x) chain, aux = site 0."""
    n = p.L + 1
    ident = np.eye(3**n, dtype=complex)
    fwd = [embed(build_R(u - p.theta[j - 1], p.eta), [0, j], n, BFF) for j in range(p.L, 0, -1)]
    bwd = [embed(build_R(u + p.theta[j - 1], p.eta), [j, 0], n, BFF) for j in range(1, p.L + 1)]
    return reduce(np.matmul, fwd, ident), reduce(np.matmul, bwd, ident)


def double_row(u: complex, p: ModelParams) -> np.ndarray:
    T, That = monodromies(u, p)
    K = embed(build_K_minus(u, p), [0], p.L + 1, BFF)
    return T @ K @ That


def double_row_blocks(u: complex, p: ModelParams) -> dict[str, np.ndarray]:
    """Named quantum-space blocks A, B1, B2, C1, C2, D11..D22 of the double-row monodromy."""
    b = aux_blocks(double_row(u, p), 3)
    return {"A": b[0][0], "B1": b[0][1], "B2": b[0][2], "C1": b[1][0], "C2": b[2][0],
            "D11": b[1][1], "D12": b[1][2], "D21": b[2][1], "D22": b[2][2]}


def transfer_matrix(u: complex, p: ModelParams) -> np.ndarray:
    """t(u) = str_0 { K+_0(u) double_row_0(u) }."""
    _check_transfer_size(p.L)
    Kp = embed(build_K_plus(u, p), [0], p.L + 1, BFF)
    return super_trace(Kp @ double_row(u, p), BFF, 0)


def transfer_matrix_blocks(u: complex, p: ModelParams) -> np.ndarray:
    """t(u) = k+_11 A - sum_{ij} k+_{i+1,j+1} D_ji, assembled from the blocks."""
    _check_transfer_size(p.L)
    k = build_K_plus(u, p)
    b = aux_blocks(double_row(u, p), 3)
    out = k[0, 0] * b[0][0]
    for i in range(2):
        for j in range(2):
            out = out - k[i + 1, j + 1] * b[j + 1][i + 1]
    return out


@dataclass
class TransferFamily:
    """t(u) as an exact operator polynomial of degree 2L + 2."""

    params: ModelParams
    poly: OperatorPoly
    nodes: np.ndarray = field(repr=False)

    def __call__(self, u: complex) -> np.ndarray:
        return self.poly(u)

    def derivative(self) -> OperatorPoly:
        return self.poly.derivative()

    def commutator_defect(self, u: complex, v: complex) -> float:
        """max|[t(u), t(v)]| relative to max|t(u) t(v)|."""
        a, b = self(u), self(v)
        prod = a @ b
        return float(np.abs(prod - b @ a).max() / np.abs(prod).max())


def build_transfer(p: ModelParams, rtol: float = 1e-10) -> TransferFamily:
    """Interpolate t(u) on Chebyshev nodes and certify the degree on a held-out node."""
    _check_transfer_size(p.L)
    degree = 2 * p.L + 2
    nodes = chebyshev_nodes(degree + 1)
    samples = [transfer_matrix(x, p) for x in nodes]
    poly = poly_interpolate(nodes, samples, degree)
    held = 0.5317 + 0.2131j
    direct = transfer_matrix(held, p)
    err = np.abs(poly(held) - direct).max() / np.abs(direct).max()
    if err > rtol:
        raise ValueError(f"degree check failed: held-out relative error {err:.3e} for degree {degree}")
    return TransferFamily(p, poly, nodes)


# -- nested (level-2) transfer matrices --------------------------------------

def nested_monodromies(lam: complex, lams, eta: complex) -> tuple[np.ndarray, np.ndarray]:
    """Tbar0 = r01(lam+lam1)...r0M(lam+lamM), Tbar^0 = rM0(lam-lamM)...r10(lam-lam1)."""
    M = len(lams)
    n = M + 1
    ident = np.eye(2**n, dtype=complex)
    fwd = [embed(build_r_nested(lam + lams[j - 1], eta), [0, j], n, FERMIONIC_2) for j in range(1, M + 1)]
    bwd = [embed(build_r_nested(lam - lams[j - 1], eta), [j, 0], n, FERMIONIC_2) for j in range(M, 0, -1)]
    return reduce(np.matmul, fwd, ident), reduce(np.matmul, bwd, ident)


def _trace_aux(op: np.ndarray, d_aux: int = 2) -> np.ndarray:
    blocks = aux_blocks(op, d_aux)
    return sum(blocks[a][a] for a in range(d_aux))


def nested_transfer_bar(lam: complex, lams, p: ModelParams) -> np.ndarray:
    """Polynomial nested transfer matrix tr_0{Kbar+ Tbar Kbar- Tbar^}."""
    M = len(lams)
    if M < 1:
        raise ValueError("nested chain needs M >= 1")
    T, That = nested_monodromies(lam, lams, p.eta)
    n = M + 1
    Kp = embed(nested_K_plus(lam, p), [0], n, FERMIONIC_2)
    Km = embed(nested_K_minus(lam, p), [0], n, FERMIONIC_2)
    return _trace_aux(Kp @ T @ Km @ That)


def nested_transfer(lam: complex, lams, p: ModelParams) -> np.ndarray:
    """(2 lam - eta)/(2 lam) times the polynomial nested transfer matrix.

    The prefactor has a genuine pole at lam = 0; use :func:`nested_transfer_bar` there.
    """
    if lam == 0:
        raise ZeroDivisionError("nested transfer prefactor has a pole at lam = 0; "
                                "evaluate nested_transfer_bar instead")
    return (2 * lam - p.eta) / (2 * lam) * nested_transfer_bar(lam, lams, p)


def nested_transfer_pregauge(u: complex, us, p: ModelParams) -> np.ndarray:
    """Nested transfer matrix written with level-1 roots and the u-parametrised K's."""
    M = len(us)
    n = M + 1
    eta = p.eta
    ident = np.eye(2**n, dtype=complex)
    fwd = [embed(build_r_nested(u + us[j - 1] + eta, eta), [0, j], n, FERMIONIC_2) for j in range(1, M + 1)]
    bwd = [embed(build_r_nested(u - us[j - 1], eta), [j, 0], n, FERMIONIC_2) for j in range(M, 0, -1)]
    Kp = embed(nested_K_plus_pregauge(u, p), [0], n, FERMIONIC_2)
    Km = embed(nested_K_minus_pregauge(u, p), [0], n, FERMIONIC_2)
    X = Kp @ reduce(np.matmul, fwd, ident) @ Km @ reduce(np.matmul, bwd, ident)
    return 2 * u / (2 * u + eta) * _trace_aux(X)


# -- Hamiltonians ------------------------------------------------------------

def number_operator(L: int) -> np.ndarray:
    """Electron number: count of sites not in the empty (index 0) state."""
    counts = (BFF.digits(L) != 0).sum(axis=1)
    return np.diag(counts.astype(float))


def boundary_denominator(p: ModelParams) -> complex:
    return (p.cp - 0.5) * p.eta - p.zetap


def hamiltonian_from_transfer(p: ModelParams, family: TransferFamily | None = None) -> np.ndarray:
    """-(eta/2) t'(0) t(0)^{-1} plus the constant shifts, at the homogeneous point."""
    hp = p.with_theta(None)
    if family is None or not family.params.is_homogeneous:
        family = build_transfer(hp)
    t0 = family(0.0)
    dt0 = family.derivative()(0.0)
    cond = np.linalg.cond(t0)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(f"t(0) is singular (condition number {cond:.3e})")
    # X t0 = dt0  <=>  t0^T X^T = dt0^T
    log_deriv = np.linalg.solve(t0.T, dt0.T).T
    const = p.eta * (2 * p.c - 1) / (2 * p.zeta) + p.zetap / boundary_denominator(p) + p.L - 1
    dim = 3**p.L
    return -(p.eta / 2) * log_deriv + const * np.eye(dim) - p.mu * number_operator(p.L)


def boundary_fields(p: ModelParams) -> dict[str, complex]:
    """Boundary chemical potentials and fields entering the t-J Hamiltonian."""
    d = boundary_denominator(p)
    return {
        "xi_1": -p.eta / (2 * p.zeta) * (1 - 2 * p.c),
        "hz_1": -p.eta / (2 * p.zeta),
        "hm_1": -p.eta / (2 * p.zeta) * p.c2,
        "hp_1": -p.eta / (2 * p.zeta) * p.c1,
        "xi_L": (p.cp - 0.5) * p.eta / d,
        "hz_L": (-p.eta / 2) / d,
        "hm_L": (-p.eta * p.c2p / 2) / d,
        "hp_L": (-p.eta * p.c1p / 2) / d,
    }


# local basis: 0 = empty, 1 = spin down, 2 = spin up (sigma = -1, +1)
_SPIN_INDEX = {-1: 1, +1: 2}


def _site_op(local: np.ndarray, j: int, L: int) -> np.ndarray:
    return np.kron(np.kron(np.eye(3**j), local), np.eye(3 ** (L - j - 1)))


def annihilation(j: int, sigma: int, L: int) -> np.ndarray:
    """Projected electron annihilator with a Jordan-Wigner string over sites < j."""
    local = np.zeros((3, 3))
    local[0, _SPIN_INDEX[sigma]] = 1.0
    string = np.diag([1.0, -1.0, -1.0])
    ops = [string] * j + [local] + [np.eye(3)] * (L - j - 1)
    return reduce(np.kron, ops)


def hamiltonian_direct(p: ModelParams) -> np.ndarray:
    """t-J Hamiltonian at J = 2t = 2 with the integrable boundary terms."""
    L = p.L
    if L > MAX_ED_SITES:
        raise ValueError(f"dense Hamiltonians are capped at L = {MAX_ED_SITES}")
    dim = 3**L
    t_hop, J = 1.0, 2.0
    c = {(j, s): annihilation(j, s, L) for j in range(L) for s in (-1, 1)}
    cd = {k: v.T for k, v in c.items()}
    n = {j: cd[j, 1] @ c[j, 1] + cd[j, -1] @ c[j, -1] for j in range(L)}
    sp = {j: cd[j, -1] @ c[j, 1] for j in range(L)}    # S+ = c^dag_{-1} c_{+1}
    sm = {j: cd[j, 1] @ c[j, -1] for j in range(L)}    # S- = c^dag_{+1} c_{-1}
    sz = {j: 0.5 * (cd[j, 1] @ c[j, 1] - cd[j, -1] @ c[j, -1]) for j in range(L)}

    H = np.zeros((dim, dim), dtype=complex)
    for j in range(L - 1):
        k = j + 1
        for s in (-1, 1):
            H -= t_hop * (cd[j, s] @ c[k, s] + cd[k, s] @ c[j, s])
        SS = sz[j] @ sz[k] + 0.5 * (sp[j] @ sm[k] + sm[j] @ sp[k])
        H += J * (SS - 0.25 * n[j] @ n[k])
        H += n[j] + n[k]
    H -= p.mu * number_operator(L)
    f = boundary_fields(p)
    for j, tag in ((0, "1"), (L - 1, "L")):
        H += (f["xi_" + tag] * n[j] + 2 * f["hz_" + tag] * sz[j]
              + 2 * f["hm_" + tag] * sm[j] + 2 * f["hp_" + tag] * sp[j])
    return H


# -- exact diagonalisation ---------------------------------------------------

@dataclass
class SpectrumED:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray | None
    source: str

    def __len__(self):
        return len(self.eigenvalues)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re_E", "im_E", "residual", "source"])
        for i, e in enumerate(self.eigenvalues):
            res = "" if self.residuals is None else f"{self.residuals[i]:.3e}"
            w.writerow([i + 1, f"{e.real:.9f}", f"{e.imag:.3e}", res, self.source])
        return buf.getvalue()


def sort_spectrum(values: np.ndarray, bucket: float = 1e-7) -> np.ndarray:
    """Indices ordering values by real part, then imaginary part, with real parts bucketed."""
    vals = np.asarray(values)
    keys = np.round(vals.real / bucket) * bucket
    return np.lexsort((vals.imag, keys))


def diagonalize(op: np.ndarray, keep_vectors: bool = False, source: str = "") -> SpectrumED:
    """Full dense spectrum with a residual certificate per eigenpair."""
    if op.shape[0] > 3**MAX_ED_SITES:
        raise ValueError(f"dimension {op.shape[0]} exceeds the dense cap 3^{MAX_ED_SITES}")
    try:
        vals, vecs = np.linalg.eig(op)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"dense eigensolver failed: {exc}") from exc
    order = sort_spectrum(vals)
    vals, vecs = vals[order], vecs[:, order]
    res = np.linalg.norm(op @ vecs - vecs * vals, axis=0) / np.linalg.norm(vecs, axis=0)
    return SpectrumED(vals, vecs if keep_vectors else None, res, source)
