"""Scalar side of the nested inhomogeneous T-Q relation.

Level-2 functions take the shifted argument ``lam = u + eta/2``; level-2
roots are stored as ``nu`` with ``w = nu + eta/2``.  Conversion happens only
in this module.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .kernels import (ModelParams, RelationReport, build_K_minus, build_K_plus, nested_K_minus,
                      nested_K_plus, rho1_bar, rho2_bar)


class PoleError(ValueError):
    """Evaluation at a pole that the Bethe equations do not cancel."""


@dataclass(frozen=True)
class BetheRootSet:
    u: tuple[complex, ...] = ()
    nu: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(complex(x) for x in self.u))
        object.__setattr__(self, "nu", tuple(complex(x) for x in self.nu))
        if len(self.u) != len(self.nu):
            raise ValueError(f"need as many level-2 as level-1 roots, got {len(self.u)} and {len(self.nu)}")

    @property
    def M(self) -> int:
        return len(self.u)

    def w(self, eta: complex) -> tuple[complex, ...]:
        return tuple(x + eta / 2 for x in self.nu)

    def lams(self, eta: complex) -> tuple[complex, ...]:
        return tuple(x + eta / 2 for x in self.u)

    def as_vector(self) -> np.ndarray:
        return np.array(self.u + self.nu, dtype=complex)

    @classmethod
    def from_vector(cls, x: Sequence[complex]) -> "BetheRootSet":
        M = len(x) // 2
        return cls(tuple(x[:M]), tuple(x[M:]))

    def to_dict(self) -> dict:
        return {"M": self.M,
                "u": [[z.real, z.imag] for z in self.u],
                "nu": [[z.real, z.imag] for z in self.nu]}

    @classmethod
    def from_dict(cls, data: dict) -> "BetheRootSet":
        return cls(tuple(complex(*z) for z in data["u"]), tuple(complex(*z) for z in data["nu"]))


@dataclass(frozen=True)
class TQContext:
    """Model parameters with the square-root branches fixed once."""

    params: ModelParams
    s_minus: complex = field(init=False)
    s_plus: complex = field(init=False)
    h: complex = field(init=False)

    def __post_init__(self):
        p = self.params
        object.__setattr__(self, "s_minus", p.sqrt_minus)
        object.__setattr__(self, "s_plus", p.sqrt_plus)
        # sqrt((1+4c1'c2')(1+4c1c2)) taken as the product of the threaded roots
        h = 0.5 * (-1 - 2 * (p.c1p * p.c2 + p.c2p * p.c1) + self.s_plus * self.s_minus)
        object.__setattr__(self, "h", complex(h))

    @property
    def eta(self) -> complex:
        return self.params.eta


def h_const(ctx: TQContext) -> complex:
    return ctx.h


def h_direct(p: ModelParams) -> complex:
    """h with the square root of the product taken directly (principal branch)."""
    rad = (1 + 4 * p.c1p * p.c2p) * (1 + 4 * p.c1 * p.c2)
    return 0.5 * (-1 - 2 * (p.c1p * p.c2 + p.c2p * p.c1) + np.sqrt(complex(rad)))


# -- polynomial building blocks -----------------------------------------------

def b0(u: complex, p: ModelParams) -> complex:
    return complex(np.prod([(u - t) * (u + t) for t in p.theta]))


def a0(u: complex, p: ModelParams) -> complex:
    return b0(u + p.eta, p)


def q1(u: complex, roots: BetheRootSet, eta: complex) -> complex:
    return complex(np.prod([(u - x) * (u + x + eta) for x in roots.u]))


def q2(lam: complex, roots: BetheRootSet, eta: complex) -> complex:
    return complex(np.prod([(lam - x - eta / 2) * (lam + x - eta / 2) for x in roots.nu]))


def abar(lam: complex, roots: BetheRootSet, eta: complex) -> complex:
    return complex(np.prod([(lam + lj - eta) * (lam - lj - eta) for lj in roots.lams(eta)]))


def dbar(lam: complex, roots: BetheRootSet, eta: complex) -> complex:
    return complex(np.prod([(lam - lj) * (lam + lj) for lj in roots.lams(eta)]))


def K1(u: complex, ctx: TQContext) -> complex:
    p = ctx.params
    eta = p.eta
    return (((2 - 4 * p.cp) * u * u + 2 * p.zetap * u - eta * p.zetap - 0.5 * eta**2 + eta**2 * p.cp)
            * (p.zeta + (2 * p.c - 1) * u))


def K2(lam: complex, ctx: TQContext) -> complex:
    p = ctx.params
    return (-ctx.s_plus * lam + p.zetap) * (ctx.s_minus * lam + p.zeta + p.eta / 2 - p.c * p.eta)


def K3(lam: complex, ctx: TQContext) -> complex:
    """Crossing partner of K2: K3(lam) = K2(-lam + eta)."""
    p = ctx.params
    return ((ctx.s_plus * (lam - p.eta) + p.zetap)
            * (ctx.s_minus * (-lam + p.eta) + p.zeta + p.eta / 2 - p.c * p.eta))


def kernels(lam: complex, ctx: TQContext) -> tuple[complex, complex, complex]:
    """(K1(u), K2(lam), K3(lam)) with u = lam - eta/2."""
    return K1(lam - ctx.eta / 2, ctx), K2(lam, ctx), K3(lam, ctx)


# -- eigenvalues --------------------------------------------------------------

def lambda_bar(lam: complex, roots: BetheRootSet, ctx: TQContext) -> complex:
    """Polynomial nested eigenvalue (no (2 lam - eta)/(2 lam) prefactor)."""
    eta = ctx.eta
    q = q2(lam, roots, eta)
    t1 = (2 * lam - 2 * eta) / (2 * lam - eta) * K2(lam, ctx) * abar(lam, roots, eta) * q2(lam + eta, roots, eta)
    t2 = 2 * lam / (2 * lam - eta) * K3(lam, ctx) * dbar(lam, roots, eta) * q2(lam - eta, roots, eta)
    t3 = 2 * lam * (2 * lam - 2 * eta) * abar(lam, roots, eta) * abar(-lam + eta, roots, eta) * ctx.h
    return (t1 + t2 + t3) / q


def lambda_nested(lam: complex, roots: BetheRootSet, ctx: TQContext) -> complex:
    """Nested eigenvalue with its (2 lam - eta)/(2 lam) prefactor."""
    if roots.M < 1:
        raise ValueError("nested eigenvalue needs M >= 1")
    if lam == 0:
        raise PoleError("nested eigenvalue has a prefactor pole at lam = 0; use lambda_bar")
    eta = ctx.eta
    q = q2(lam, roots, eta)
    t1 = (2 * lam - 2 * eta) / (2 * lam) * K2(lam, ctx) * abar(lam, roots, eta) * q2(lam + eta, roots, eta)
    t2 = K3(lam, ctx) * dbar(lam, roots, eta) * q2(lam - eta, roots, eta)
    t3 = (2 * lam - eta) * (2 * lam - 2 * eta) * abar(lam, roots, eta) * abar(-lam + eta, roots, eta) * ctx.h
    return (t1 + t2 + t3) / q


def _lambda_raw(u: complex, roots: BetheRootSet, ctx: TQContext) -> complex:
    p = ctx.params
    eta = p.eta
    q1u, q1m = q1(u, roots, eta), q1(u - eta, roots, eta)
    qa = q2(u + eta / 2, roots, eta)
    bu = b0(u, p)
    term1 = K1(u, ctx) * a0(u, p) * q1m / ((2 * u + eta) * q1u)
    term2 = -((2 * u - eta) / (2 * u + eta) * K2(u + eta / 2, ctx) * bu
              * q1m * q2(u + 1.5 * eta, roots, eta) / (q1u * qa))
    term3 = -K3(u + eta / 2, ctx) * bu * q2(u - eta / 2, roots, eta) / qa
    term4 = -2 * u * (2 * u - eta) * bu * ctx.h * q1m / qa
    return term1 + term2 + term3 + term4


def _pole_distance(u: complex, roots: BetheRootSet, eta: complex) -> float:
    cands = [x for x in roots.u] + [-x - eta for x in roots.u] + list(roots.nu) + [-x for x in roots.nu]
    cands.append(-eta / 2)
    return min((abs(u - z) for z in cands), default=np.inf)


def lambda_tq(u: complex, roots: BetheRootSet, ctx: TQContext, pole_radius: float = 1e-6,
              stencil: float = 1e-3, bae_tol: float = 1e-6) -> complex:
    """Transfer-matrix eigenvalue from the four-term inhomogeneous T-Q relation.

    Near a zero of Q1(u) or Q2(u + eta/2) the value is the mean over a
    four-point stencil on a small circle, which is exact for cubics.
    """
    if _pole_distance(u, roots, ctx.eta) > pole_radius:
        return _lambda_raw(u, roots, ctx)
    if roots.M:
        worst = max_residual(roots, ctx)
        if not worst <= bae_tol:
            raise PoleError(f"u = {u!r} sits on a pole and the Bethe equations fail (residual {worst:.3e})")
    pts = u + stencil * np.array([1, 1j, -1, -1j])
    return complex(np.mean([_lambda_raw(z, roots, ctx) for z in pts]))


def lambda_from_nested(u: complex, roots: BetheRootSet, ctx: TQContext,
                       nested_value: complex | None = None) -> complex:
    """Level-1 eigenvalue assembled from the vacuum term and a nested eigenvalue."""
    p = ctx.params
    eta = p.eta
    kp = build_K_plus(u, p)
    km = build_K_minus(u, p)
    pref = (-eta / (2 * u + eta) * (kp[1, 1] + kp[2, 2]) + kp[0, 0]) * km[0, 0] * a0(u, p)
    ratio = np.prod([(u - x - eta) * (u + x) / ((u - x) * (u + x + eta)) for x in roots.u])
    if roots.M == 0:
        # the M = 0 nested problem has a one-dimensional space
        lb = (2 * u / (2 * u + eta)) * np.trace(nested_K_plus(u + eta / 2, p) @ nested_K_minus(u + eta / 2, p))
        return complex(pref * ratio - b0(u, p) * lb)
    if nested_value is None:
        nested_value = lambda_nested(u + eta / 2, roots, ctx)
    denom = np.prod([(u - x) * (u + x + eta) for x in roots.u])
    return complex(pref * ratio - b0(u, p) / denom * nested_value)


# -- Bethe equations ------------------------------------------------------------

def bae_residuals(roots: BetheRootSet, ctx: TQContext) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of the coupled equations: level-2 (one per nu) and level-1 (one per u)."""
    p = ctx.params
    eta = p.eta
    lv2 = []
    for v in roots.nu:
        k3 = K3(v + eta / 2, ctx)
        qm = q2(v - eta / 2, roots, eta)
        q1m = q1(v - eta, roots, eta)
        lhs = 1 + ((2 * v - eta) * K2(v + eta / 2, ctx) * q1m * q2(v + 1.5 * eta, roots, eta)
                   / ((2 * v + eta) * k3 * q1(v, roots, eta) * qm))
        rhs = -ctx.h * (2 * v) * (2 * v - eta) * q1m / (k3 * qm)
        lv2.append(lhs - rhs)
    lv1 = []
    for x in roots.u:
        rhs = ((2 * x - eta) * K2(x + eta / 2, ctx) * b0(x, p) * q2(x + 1.5 * eta, roots, eta)
               / (K1(x, ctx) * a0(x, p) * q2(x + eta / 2, roots, eta)))
        lv1.append(1 - rhs)
    return np.array(lv2, dtype=complex), np.array(lv1, dtype=complex)


def max_residual(roots: BetheRootSet, ctx: TQContext) -> float:
    r2, r1 = bae_residuals(roots, ctx)
    vals = np.abs(np.concatenate([r2, r1]))
    return float(vals.max()) if len(vals) else 0.0


def bae_level1_nested_form(roots: BetheRootSet, ctx: TQContext) -> np.ndarray:
    """1 - K1 a0 Q1(u_k - eta) / ((2u_k + eta) b0 Lambda_nested(u_k)) per level-1 root."""
    p = ctx.params
    eta = p.eta
    out = []
    for x in roots.u:
        ln = lambda_nested(x + eta / 2, roots, ctx)
        out.append(1 - K1(x, ctx) * a0(x, p) * q1(x - eta, roots, eta) / ((2 * x + eta) * b0(x, p) * ln))
    return np.array(out, dtype=complex)


def bae_residue_form(roots: BetheRootSet, ctx: TQContext) -> np.ndarray:
    """Residues of the nested eigenvalue at each w_j, relative to its largest term (must vanish)."""
    eta = ctx.eta
    out = []
    for w in roots.w(eta):
        terms = ((2 * w - 2 * eta) * K2(w, ctx) * abar(w, roots, eta) * q2(w + eta, roots, eta),
                 2 * w * K3(w, ctx) * dbar(w, roots, eta) * q2(w - eta, roots, eta),
                 2 * w * (2 * w - eta) * (2 * w - 2 * eta) * abar(w, roots, eta) * abar(-w + eta, roots, eta) * ctx.h)
        out.append(sum(terms) / max(max(abs(t) for t in terms), 1e-300))
    return np.array(out, dtype=complex)


def energy(roots: BetheRootSet, ctx: TQContext) -> complex:
    p = ctx.params
    eta = p.eta
    for x in roots.u:
        if abs(x) < 1e-14 or abs(x + eta) < 1e-14:
            raise PoleError(f"root {x!r} sits on a pole of the energy summand")
    return complex(-sum(eta**2 / (x * (x + eta)) for x in roots.u) - p.mu * roots.M)


# -- functional relations -------------------------------------------------------

def delta_q(lam: complex, roots: BetheRootSet, ctx: TQContext) -> complex:
    p = ctx.params
    eta = p.eta
    val = ((2 * eta + 2 * lam) * (2 * eta - 2 * lam)
           * (p.zetap**2 - (1 + 4 * p.c1p * p.c2p) * lam**2)
           * ((p.zeta + 0.5 * eta - p.c * eta) ** 2 - (1 + 4 * p.c1 * p.c2) * lam**2))
    for lj in roots.lams(eta):
        val *= (lam + lj - eta) * (lam - lj - eta) * (lam - lj + eta) * (lam + lj + eta)
    return complex(val)


def asymptotic_coefficient(p: ModelParams) -> complex:
    return -2 - 4 * p.c1 * p.c2p - 4 * p.c1p * p.c2


def special_value_zero(roots: BetheRootSet, ctx: TQContext) -> complex:
    p = ctx.params
    eta = p.eta
    prod = np.prod([rho1_bar(lj, eta) for lj in roots.lams(eta)])
    return complex(prod * np.trace(nested_K_plus(0, p)) * nested_K_minus(0, p)[0, 0])


def special_value_eta(roots: BetheRootSet, ctx: TQContext) -> complex:
    p = ctx.params
    eta = p.eta
    prod = np.prod([rho2_bar(lj + eta, eta) for lj in roots.lams(eta)])
    return complex(prod * np.trace(nested_K_minus(eta, p)) * nested_K_plus(eta, p)[0, 0])


def functional_checks(roots: BetheRootSet, ctx: TQContext, seed: int = 0, n_points: int = 10,
                      radius: float = 1e4) -> list[RelationReport]:
    """Crossing, asymptotics, product identity and special values of the nested eigenvalue.

    Tolerances: 1e-8 absolute (crossing, special points), relative 1e-6
    (asymptotic coefficient), relative 1e-7 (product identity).
    """
    eta = ctx.eta
    rng = np.random.default_rng(seed)
    pts = list(rng.uniform(-1.5, 1.5, n_points) + 1j * rng.uniform(-1.5, 1.5, n_points))
    lb = lambda x: lambda_bar(x, roots, ctx)
    cross = max(abs(lb(x) - lb(-x + eta)) for x in pts)

    M = roots.M
    target = asymptotic_coefficient(ctx.params)
    asym_pts = [eta / 2 + radius * np.exp(1j * phi) for phi in (0.3, 1.9, 3.7)]
    # the crossing centre eta/2 removes the leading correction
    asym = max(abs(lb(x) / (x - eta / 2) ** (2 * M + 2) - target) / abs(target) for x in asym_pts)

    prod = 0.0
    for lj in roots.lams(eta):
        lhs = lb(lj) * lb(lj + eta)
        rhs = delta_q(lj, roots, ctx) / ((eta - 2 * lj) * (eta + 2 * lj))
        prod = max(prod, abs(lhs - rhs) / max(abs(rhs), 1e-300))

    zero = abs(lb(0.0) - special_value_zero(roots, ctx))
    at_eta = abs(lb(eta) - special_value_eta(roots, ctx))
    return [
        RelationReport("crossing", 1e-8, float(cross), float(cross), pts),
        RelationReport("asymptotic", 1e-6, float(asym), float(asym), asym_pts),
        RelationReport("product_identity", 1e-7, float(prod), float(prod), list(roots.lams(eta))),
        RelationReport("special_zero", 1e-8, float(zero), float(zero), [0.0]),
        RelationReport("special_eta", 1e-8, float(at_eta), float(at_eta), [eta]),
    ]


def reports_to_json(reports: list[RelationReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=1)
