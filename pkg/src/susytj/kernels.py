"""R-matrices, reflection matrices, gauge matrices and their algebraic relations."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .graded import (BFF, FERMIONIC_2, GradedSpace, embed, graded_permutation,
                     plain_permutation, super_transpose)


class ConstraintError(ValueError):
    """Boundary parameters violate c**2 = c1*c2 + c."""


class SingularGaugeError(ValueError):
    """A gauge matrix or one of its closed-form parameters is singular."""


def _solve_partner(c: complex, c1: complex, c2: complex | None, label: str) -> complex:
    if c2 is not None:
        lhs, rhs = c * c, c1 * c2 + c
        if abs(lhs - rhs) > 1e-12 * max(1.0, abs(lhs)):
            raise ConstraintError(f"{label}: c^2 = {lhs!r} but c1*c2 + c = {rhs!r}")
        return c2
    if c1 != 0:
        return (c * c - c) / c1
    if c not in (0, 1):
        raise ConstraintError(f"{label}: c1 = 0 requires c in {{0, 1}} (c^2 - c1*c2 - c = {c * c - c!r})")
    return 0.0


@dataclass(frozen=True)
class ModelParams:
    """Couplings, boundary parameters and chain geometry.

    ``c2`` and ``c2p`` are derived from the boundary constraints unless given.
    """

    eta: complex
    zeta: complex
    c: complex
    c1: complex
    zetap: complex
    cp: complex
    c1p: complex
    mu: float = 0.0
    L: int = 2
    theta: tuple[complex, ...] | None = None
    c2: complex | None = None
    c2p: complex | None = None

    def __post_init__(self):
        if self.eta == 0:
            raise ValueError("eta must be nonzero")
        if self.L < 1:
            raise ValueError(f"chain length must be positive, got {self.L}")
        object.__setattr__(self, "c2", _solve_partner(self.c, self.c1, self.c2, "K-"))
        object.__setattr__(self, "c2p", _solve_partner(self.cp, self.c1p, self.c2p, "K+"))
        theta = tuple(self.theta) if self.theta is not None else (0.0,) * self.L
        if len(theta) != self.L:
            raise ValueError(f"need {self.L} inhomogeneities, got {len(theta)}")
        object.__setattr__(self, "theta", theta)

    @property
    def sqrt_minus(self) -> complex:
        """sqrt(1 + 4(c^2 - c)), principal branch."""
        return np.sqrt(complex(1 + 4 * (self.c * self.c - self.c)))

    @property
    def sqrt_plus(self) -> complex:
        """sqrt(1 + 4(c'^2 - c')), principal branch."""
        return np.sqrt(complex(1 + 4 * (self.cp * self.cp - self.cp)))

    @property
    def is_homogeneous(self) -> bool:
        return all(t == 0 for t in self.theta)

    @property
    def is_diagonal(self) -> bool:
        return self.c1 == 0 and self.c2 == 0 and self.c1p == 0 and self.c2p == 0

    def with_theta(self, theta: Sequence[complex] | None) -> "ModelParams":
        return replace(self, theta=None if theta is None else tuple(theta))

    def with_length(self, L: int) -> "ModelParams":
        return replace(self, L=L, theta=None)

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("c2", "c2p", "theta")}
        out["theta"] = [complex(t).real if complex(t).imag == 0 else [complex(t).real, complex(t).imag]
                        for t in self.theta]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        keys = ("eta", "zeta", "c", "c1", "zetap", "cp", "c1p", "mu", "L", "theta", "c2", "c2p")
        kw = {k: data[k] for k in keys if k in data}
        if kw.get("theta") is not None:
            kw["theta"] = tuple(complex(*t) if isinstance(t, list) else t for t in kw["theta"])
        return cls(**kw)


def table_params(L: int = 2) -> ModelParams:
    """Benchmark couplings (L = 2 and L = 3 spectra)."""
    return ModelParams(eta=0.2, zeta=0.1, c=0.1, c1=-0.5, zetap=-0.5, cp=-0.3, c1p=-0.7, mu=2.0, L=L)


def random_params(rng: np.random.Generator, L: int = 2, diagonal: bool = False, mu: float = 0.0) -> ModelParams:
    """Random real couplings obeying both boundary constraints.

    Off-diagonal amplitudes stay away from zero so the gauges are regular;
    with ``diagonal`` the off-diagonals vanish and c, c' are drawn from {0, 1}.
    """
    eta = float(rng.uniform(0.1, 0.6))
    zeta, zetap = map(float, rng.uniform(-1, 1, 2))
    if diagonal:
        c, cp = map(float, rng.choice([0.0, 1.0], 2))
        return ModelParams(eta, zeta, c, 0.0, zetap, cp, 0.0, mu, L)
    c, cp = map(float, rng.uniform(-0.8, 0.8, 2))
    c1, c1p = map(float, rng.uniform(0.2, 1.0, 2) * rng.choice([-1, 1], 2))
    return ModelParams(eta, zeta, c, c1, zetap, cp, c1p, mu, L)


# -- R-matrices -------------------------------------------------------------

_P = graded_permutation(BFF)
_PBAR = plain_permutation(2)
# the nested objects use plain transposes
_UNGRADED_2 = GradedSpace((0, 0))


def build_R(u: complex, eta: complex) -> np.ndarray:
    """Rational graded R-matrix u*id + eta*P on BFF (x) BFF."""
    return u * np.eye(9, dtype=complex) + eta * _P


def build_R21(u: complex, eta: complex) -> np.ndarray:
    return _P @ build_R(u, eta) @ _P


def rho1(u, eta):
    return -(u - eta) * (u + eta)


def rho2(u, eta):
    return -u * (u - eta)


def build_r_nested(lam: complex, eta: complex) -> np.ndarray:
    """Nested r(lam) = lam*id + eta*P_graded on the all-odd 2-dim space, i.e. lam - eta*Pbar."""
    return lam * np.eye(4, dtype=complex) + eta * graded_permutation(FERMIONIC_2)


def rho1_bar(lam, eta):
    return -(lam - eta) * (lam + eta)


def rho2_bar(lam, eta):
    return -lam * (lam - 2 * eta)


# -- reflection matrices ------------------------------------------------------

def _k_minus_form(u, zeta, c, c1, c2) -> np.ndarray:
    return np.array([[zeta + (2 * c - 1) * u, 0, 0],
                     [0, zeta - u, 2 * c1 * u],
                     [0, 2 * c2 * u, zeta + u]], dtype=complex)


def build_K_minus(u: complex, p: ModelParams) -> np.ndarray:
    return _k_minus_form(u, p.zeta, p.c, p.c1, p.c2)


def build_K_plus(u: complex, p: ModelParams) -> np.ndarray:
    """K-(-u + eta/2) with the primed boundary parameters."""
    return _k_minus_form(-u + p.eta / 2, p.zetap, p.cp, p.c1p, p.c2p)


def nested_K_minus(lam: complex, p: ModelParams) -> np.ndarray:
    a = p.eta / 2 + p.zeta - p.c * p.eta
    return np.array([[-lam + a, 2 * p.c1 * lam],
                     [2 * p.c2 * lam, lam + a]], dtype=complex)


def nested_K_plus(lam: complex, p: ModelParams) -> np.ndarray:
    return np.array([[p.zetap + lam - p.eta, 2 * p.c1p * (-lam + p.eta)],
                     [2 * p.c2p * (-lam + p.eta), p.zetap - lam + p.eta]], dtype=complex)


def nested_K_plus_pregauge(u: complex, p: ModelParams) -> np.ndarray:
    """Lower-right 2x2 block of K+(u)."""
    return build_K_plus(u, p)[1:, 1:]


def nested_K_minus_pregauge(u: complex, p: ModelParams) -> np.ndarray:
    """(2u+eta)/(2u) times the lower block of K-(u) with the k11 shift removed from the diagonal."""
    k = build_K_minus(u, p)
    shift = p.eta / (2 * u + p.eta) * k[0, 0]
    blk = k[1:, 1:] - shift * np.eye(2)
    return (2 * u + p.eta) / (2 * u) * blk


# -- gauge matrices -----------------------------------------------------------

@dataclass(frozen=True)
class Gauges:
    g_minus: np.ndarray
    g_plus: np.ndarray
    m: complex
    n: complex


def gauge_parameters(p: ModelParams) -> tuple[complex, complex]:
    """Closed forms of m and n; a vanishing numerator over a vanishing denominator is read as 0."""
    s = np.sqrt(complex(1 + 4 * p.c1 * p.c2))
    x = 2 * p.c1 * p.c2p
    y = 2 * p.c1p * p.c2
    base = 1 + x + y
    num_m = -4 * p.c1 * p.c2 - (x - y) * s + x + y
    num_n = -4 * p.c1 * p.c2 - (y - x) * s + x + y
    out = []
    for num, den, label in ((num_m, base * (s + 1), "m"), (num_n, base * (s - 1), "n")):
        if abs(den) < 1e-14:
            if abs(num) < 1e-14:
                out.append(0.0)
                continue
            raise SingularGaugeError(f"{label}: denominator {den!r} vanishes (numerator {num!r})")
        out.append(num / den)
    return out[0], out[1]


def build_gauges(p: ModelParams) -> Gauges:
    s = np.sqrt(complex(1 + 4 * p.c1 * p.c2))
    if abs(s) < 1e-14:
        raise SingularGaugeError("1 + 4 c1 c2 vanishes")
    if abs(1 - s) < 1e-14 or abs(1 + s) < 1e-14:
        raise SingularGaugeError(f"g-: 1 -/+ sqrt(1 + 4 c1 c2) vanishes (sqrt = {s!r}); "
                                 "diagonal K- boundaries have no gauge of this form")
    gm = np.array([[-1, 2 * p.c1 / (1 - s)],
                   [1, -2 * p.c1 / (1 + s)]], dtype=complex)
    m, n = gauge_parameters(p)
    smn = np.sqrt(complex(1 + m * n))
    gp = np.array([[-m, smn - 1],
                   [-m, -smn - 1]], dtype=complex)
    for name, g in (("g-", gm), ("g+", gp)):
        det = np.linalg.det(g)
        if abs(det) < 1e-12:
            raise SingularGaugeError(f"{name} is singular (det = {det!r}, m = {m!r}, n = {n!r})")
    return Gauges(gm, gp, m, n)


def gauged_K_minus_diagonal(lam: complex, p: ModelParams) -> np.ndarray:
    s = np.sqrt(complex(1 + 4 * p.c1 * p.c2))
    a = p.eta / 2 + p.zeta - p.c * p.eta
    return np.diag([a + lam * s, a - lam * s])


def gauged_K_plus_diagonal(lam: complex, p: ModelParams, g: Gauges) -> np.ndarray:
    s = np.sqrt(complex(1 + 4 * p.c1 * p.c2))
    base = 1 + 2 * p.c1 * p.c2p + 2 * p.c1p * p.c2
    smn = np.sqrt(complex(1 + g.m * g.n))
    shift = s / base * p.zetap
    return -base / s * np.diag([smn * (lam - p.eta) - shift, -smn * (lam - p.eta) - shift])


# -- relation checks ----------------------------------------------------------

RELATIONS = ("QYBE", "RE", "dualRE", "unitarity", "crossing", "nestedRE", "nested_props")


@dataclass
class RelationReport:
    relation: str
    tol: float
    max_residual: float
    frobenius: float
    points: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tol)

    def to_dict(self) -> dict:
        return {"relation": self.relation, "tol": self.tol, "max_residual": self.max_residual,
                "frobenius": self.frobenius,
                "points": [[[complex(z).real, complex(z).imag] for z in np.atleast_1d(pt)] for pt in self.points],
                "pass": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def sample_points(count: int, eta: complex, seed: int = 0, arity: int = 2) -> list[tuple[complex, ...]]:
    """Structured degenerate points first, then seeded random points of modulus <= 2."""
    special = [0.0, eta, -eta, eta / 2, -eta / 2]
    rng = np.random.default_rng(seed)
    pts: list[tuple[complex, ...]] = []
    for i, s in enumerate(special):
        pts.append(tuple([s] + [special[(i + k + 1) % len(special)] for k in range(arity - 1)]))
    while len(pts) < count:
        r = 2 * np.sqrt(rng.uniform(size=arity))
        phi = rng.uniform(0, 2 * np.pi, size=arity)
        pts.append(tuple(r * np.exp(1j * phi)))
    return pts[:count]


def _on(op, sites, n, space):
    return embed(op, sites, n, space)


def _qybe_entrywise(lam, mu, eta) -> float:
    """Residual of the index form of the graded Yang-Baxter equation."""
    par = np.asarray(BFF.parity)
    R = lambda x: build_R(x, eta).reshape(3, 3, 3, 3)   # [a1, a2, b1, b2]
    A, B, C = R(lam - mu), R(lam), R(mu)
    # sgn[x, y, z] = (-1)^{(p(x) + p(y)) p(z)}
    sgn = (-1.0) ** (((par[:, None] + par[None, :]) % 2)[:, :, None] * par[None, None, :])
    lhs = np.einsum("xyBC,BzgD,CDhk,BgC->xyzghk", A, B, C, sgn)
    rhs = np.einsum("yzCD,xDBk,BCgh,xBC->xyzghk", C, B, A, sgn)
    return float(np.abs(lhs - rhs).max())


def _relation_residual(name: str, pt: tuple, p: ModelParams) -> tuple[np.ndarray, float]:
    eta = p.eta
    u1, u2 = pt[0], pt[1]
    if name == "QYBE":
        R12 = _on(build_R(u1 - u2, eta), [0, 1], 3, BFF)
        R13 = _on(build_R(u1, eta), [0, 2], 3, BFF)
        R23 = _on(build_R(u2, eta), [1, 2], 3, BFF)
        diff = R12 @ R13 @ R23 - R23 @ R13 @ R12
        return diff, _qybe_entrywise(u1, u2, eta)
    if name == "RE":
        K1 = _on(build_K_minus(u1, p), [0], 2, BFF)
        K2 = _on(build_K_minus(u2, p), [1], 2, BFF)
        lhs = build_R(u1 - u2, eta) @ K1 @ build_R21(u1 + u2, eta) @ K2
        rhs = K2 @ build_R(u1 + u2, eta) @ K1 @ build_R21(u1 - u2, eta)
        return lhs - rhs, 0.0
    if name == "dualRE":
        K1 = _on(build_K_plus(u1, p), [0], 2, BFF)
        K2 = _on(build_K_plus(u2, p), [1], 2, BFF)
        lhs = build_R(u2 - u1, eta) @ K1 @ build_R21(-u1 - u2 + eta, eta) @ K2
        rhs = K2 @ build_R(-u1 - u2 + eta, eta) @ K1 @ build_R21(u2 - u1, eta)
        return lhs - rhs, 0.0
    if name == "unitarity":
        diff = build_R(u1, eta) @ build_R21(-u1, eta) - rho1(u1, eta) * np.eye(9)
        init = build_R(0, eta) - eta * _P
        return diff, float(np.abs(init).max())
    if name == "crossing":
        lhs = (super_transpose(build_R(-u1 + eta, eta), BFF, 0, "st")
               @ super_transpose(build_R21(u1, eta), BFF, 0, "st"))
        return lhs - rho2(u1, eta) * np.eye(9), 0.0
    if name == "nestedRE":
        r12 = lambda x: build_r_nested(x, eta)
        r21 = lambda x: _PBAR @ build_r_nested(x, eta) @ _PBAR
        K1 = _on(nested_K_minus(u1, p), [0], 2, FERMIONIC_2)
        K2 = _on(nested_K_minus(u2, p), [1], 2, FERMIONIC_2)
        d1 = r12(u1 - u2) @ K1 @ r21(u1 + u2) @ K2 - K2 @ r12(u1 + u2) @ K1 @ r21(u1 - u2)
        Kp1 = _on(nested_K_plus(u1, p), [0], 2, FERMIONIC_2)
        Kp2 = _on(nested_K_plus(u2, p), [1], 2, FERMIONIC_2)
        d2 = (r12(u2 - u1) @ Kp1 @ r21(-u1 - u2 + 2 * eta) @ Kp2
              - Kp2 @ r12(-u1 - u2 + 2 * eta) @ Kp1 @ r21(u2 - u1))
        return d1, float(np.abs(d2).max())
    if name == "nested_props":
        r12 = lambda x: build_r_nested(x, eta)
        r21 = lambda x: _PBAR @ build_r_nested(x, eta) @ _PBAR
        t1 = lambda X: super_transpose(X, _UNGRADED_2, 0, "st")
        init = r12(0) + eta * _PBAR
        unit = r12(u1) @ r21(-u1) - rho1_bar(u1, eta) * np.eye(4)
        cross = t1(r12(u1)) @ t1(r21(-u1 + 2 * eta)) - rho2_bar(u1, eta) * np.eye(4)
        both = super_transpose(t1(r12(u1)), _UNGRADED_2, 1, "st")
        pt_sym = r21(u1) - both
        extra = max(np.abs(init).max(), np.abs(cross).max(), np.abs(pt_sym).max())
        return unit, float(extra)
    raise ValueError(f"unknown relation {name!r}; expected one of {RELATIONS}")


def check_relation(relation: str, p: ModelParams, points: Iterable[tuple] | None = None,
                   tol: float = 1e-10, count: int = 20, seed: int = 0) -> RelationReport:
    """Max entrywise residual of ``relation`` over sampled spectral points.

    The entrywise maximum gates the report; the Frobenius norm is recorded too.
    """
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}; expected one of {RELATIONS}")
    pts = list(points) if points is not None else sample_points(count, p.eta, seed)
    worst = 0.0
    frob = 0.0
    for pt in pts:
        diff, extra = _relation_residual(relation, tuple(pt), p)
        worst = max(worst, float(np.abs(diff).max()), extra)
        frob = max(frob, float(np.linalg.norm(diff)))
    return RelationReport(relation, tol, worst, frob, pts)
