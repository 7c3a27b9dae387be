"""Z2-graded linear algebra on tensor powers of a small graded space.

Operators are plain dense complex ``ndarray`` objects; the grading travels
alongside as a :class:`GradedSpace`.  Multi-site operators use lexicographic
basis ordering with site 0 (the auxiliary space, when present) leftmost.

Sign convention for the super tensor product::

    (A (x) B)^{a c}_{b d} = (-1)^{[p(a) + p(b)] p(c)} A^a_b B^c_d

so an operator on ``n`` factors whose entries are those of a product of
elementary matrices ``E_{a1 b1} (x) ... (x) E_{an bn}`` carries the sign
``prod_{i<j} (-1)^{[p(a_i) + p(b_i)] p(a_j)}``.  All signs are materialized
into the matrix entries, so composition is ordinary matrix multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class GradedSpace:
    """A finite-dimensional Z2-graded vector space given by its parities."""

    parity: tuple[int, ...]

    def __post_init__(self):
        if not self.parity or any(p not in (0, 1) for p in self.parity):
            raise ValueError(f"parities must be a non-empty tuple of 0/1, got {self.parity}")

    @property
    def dim(self) -> int:
        return len(self.parity)

    def digits(self, n: int) -> np.ndarray:
        """Local indices of every basis state of the n-fold power, shape (d**n, n)."""
        return _digits(self.dim, n)

    def basis_parity(self, n: int) -> np.ndarray:
        """Total parity (mod 2) of every basis state of the n-fold power."""
        par = np.asarray(self.parity)
        return par[self.digits(n)].sum(axis=1) % 2

    def parity_operator(self, n: int = 1) -> np.ndarray:
        return np.diag((-1.0) ** self.basis_parity(n))


# boson-fermion-fermion grading of the t-J local space; index 0 is the empty site
BFF = GradedSpace((0, 1, 1))
# all-fermionic two-dimensional space carried by the nested problem
FERMIONIC_2 = GradedSpace((1, 1))


@lru_cache(maxsize=None)
def _digits(d: int, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0), dtype=int)
    idx = np.arange(d**n)
    out = np.empty((d**n, n), dtype=int)
    for k in range(n - 1, -1, -1):
        out[:, k] = idx % d
        idx = idx // d
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def sign_matrix(space: GradedSpace, n: int) -> np.ndarray:
    """Sign pattern of n-factor super tensor products of elementary matrices."""
    p = np.asarray(space.parity)[space.digits(n)]
    # exponent = sum_j pa_j * sum_{i<j} (pa_i + pb_i)
    lower = np.tril(np.ones((n, n), dtype=int), k=-1)
    row_term = np.einsum("aj,ji,ai->a", p, lower, p)
    bilinear = p @ lower @ p.T
    expo = (row_term[:, None] + bilinear) % 2
    out = 1.0 - 2.0 * expo
    out.flags.writeable = False
    return out


def n_factors(op: np.ndarray, space: GradedSpace) -> int:
    size = op.shape[0]
    n = int(round(np.log(size) / np.log(space.dim)))
    if op.shape != (size, size) or space.dim**n != size:
        raise ValueError(f"operator of shape {op.shape} is not square on a power of dim {space.dim}")
    return n


def graded_permutation(space: GradedSpace) -> np.ndarray:
    """P^{a1 a2}_{b1 b2} = (-1)^{p(a1) p(a2)} delta_{a1 b2} delta_{b1 a2}."""
    d = space.dim
    out = np.zeros((d * d, d * d))
    for a1 in range(d):
        for a2 in range(d):
            out[a1 * d + a2, a2 * d + a1] = (-1) ** (space.parity[a1] * space.parity[a2])
    return out


def plain_permutation(d: int) -> np.ndarray:
    """Ungraded flip P^{a1 a2}_{b1 b2} = delta_{a1 b2} delta_{b1 a2}."""
    out = np.zeros((d * d, d * d))
    for a1 in range(d):
        for a2 in range(d):
            out[a1 * d + a2, a2 * d + a1] = 1.0
    return out


def super_tensor(a: np.ndarray, b: np.ndarray, space: GradedSpace) -> np.ndarray:
    """Super tensor product of operators on ``space**na`` and ``space**nb``."""
    na, nb = n_factors(a, space), n_factors(b, space)
    # strip the signs, take the plain Kronecker product of coefficients, re-sign
    ca = a * sign_matrix(space, na)
    cb = b * sign_matrix(space, nb)
    return np.kron(ca, cb) * sign_matrix(space, na + nb)


def _elementary_parity(space: GradedSpace, n: int) -> np.ndarray:
    """p(a_k) + p(b_k) for every (row, col) pair and factor k, shape (N, N, n)."""
    p = np.asarray(space.parity)[space.digits(n)]
    return (p[:, None, :] + p[None, :, :]) % 2


def embed(op: np.ndarray, sites: Sequence[int], n: int, space: GradedSpace) -> np.ndarray:
    """Super embedding of a k-factor operator into an n-factor chain.

    Factor ``i`` of ``op`` lands on chain site ``sites[i]``; identity acts
    elsewhere.  Reordering odd components picks up the graded exchange sign,
    so ``embed(R, [1, 0], 2)`` equals ``P R P``.
    """
    sites = list(sites)
    k = n_factors(op, space)
    if len(sites) != k:
        raise ValueError(f"operator acts on {k} factors but {len(sites)} sites were given")
    if len(set(sites)) != k:
        raise ValueError(f"duplicate sites {sites}")
    if any(s < 0 or s >= n for s in sites):
        raise ValueError(f"sites {sites} out of range for a chain of {n} factors")

    d = space.dim
    coeff = op * sign_matrix(space, k)
    order = [(i, j) for i in range(k) for j in range(i + 1, k) if sites[i] > sites[j]]
    if order:
        ep = _elementary_parity(space, k)
        expo = np.zeros(coeff.shape, dtype=int)
        for i, j in order:
            expo += ep[:, :, i] * ep[:, :, j]
        coeff = coeff * (1 - 2 * (expo % 2))

    rest = [s for s in range(n) if s not in sites]
    full = np.kron(coeff, np.eye(d ** len(rest)))
    full = full.reshape((d,) * (2 * n))
    # axes currently ordered (sites..., rest...) for rows then columns
    current = sites + rest
    perm = [current.index(s) for s in range(n)]
    full = full.transpose(perm + [n + q for q in perm]).reshape(d**n, d**n)
    return full * sign_matrix(space, n)


def super_transpose(op: np.ndarray, space: GradedSpace, factor: int = 0, mode: str = "st") -> np.ndarray:
    """Partial super transposition on one factor.

    ``st``:  (A^st)_{ij} = A_{ji} (-1)^{p(i)[p(i) + p(j)]}
    ``ist``: (A^ist)_{ij} = A_{ji} (-1)^{p(j)[p(i) + p(j)]}
    """
    if mode not in ("st", "ist"):
        raise ValueError(f"mode must be 'st' or 'ist', got {mode!r}")
    n = n_factors(op, space)
    if not 0 <= factor < n:
        raise ValueError(f"factor {factor} out of range for {n} factors")
    d = space.dim
    par = np.asarray(space.parity)
    coeff = (op * sign_matrix(space, n)).reshape((d,) * (2 * n))
    axes = list(range(2 * n))
    axes[factor], axes[n + factor] = n + factor, factor
    coeff = coeff.transpose(axes)
    # new row index i, new column index j on the transposed factor
    pi = par[:, None]
    pj = par[None, :]
    local = (-1.0) ** ((pi if mode == "st" else pj) * (pi + pj))
    shape = [1] * (2 * n)
    shape[factor], shape[n + factor] = d, d
    coeff = coeff * local.reshape(shape)
    return coeff.reshape(d**n, d**n) * sign_matrix(space, n)


def super_trace(op: np.ndarray, space: GradedSpace, factor: int = 0) -> np.ndarray | complex:
    """Partial super trace over one factor: sum_a (-1)^{p(a)} [op]_{aa}."""
    n = n_factors(op, space)
    if not 0 <= factor < n:
        raise ValueError(f"factor {factor} out of range for {n} factors")
    d = space.dim
    coeff = (op * sign_matrix(space, n)).reshape((d,) * (2 * n))
    weights = (-1.0) ** np.asarray(space.parity)
    if n == 1:
        return complex(np.sum(np.diag(op) * weights))
    # einsum with a repeated label on both axes takes the diagonal
    labels = list(range(2 * n))
    labels[n + factor] = factor
    out_labels = [a for a in range(2 * n) if a not in (factor, n + factor)]
    red = np.einsum(coeff, labels, weights, [factor], out_labels)
    m = n - 1
    return red.reshape(d**m, d**m) * sign_matrix(space, m)


def is_even(op: np.ndarray, space: GradedSpace, atol: float = 0.0) -> bool:
    """True when every entry linking states of different total parity vanishes."""
    n = n_factors(op, space)
    bp = space.basis_parity(n)
    odd = bp[:, None] != bp[None, :]
    return bool(np.all(np.abs(op[odd]) <= atol))


def aux_blocks(op: np.ndarray, d_aux: int) -> list[list[np.ndarray]]:
    """Split an operator on aux (x) quantum into its d_aux x d_aux quantum blocks."""
    size = op.shape[0] // d_aux
    return [[op[a * size:(a + 1) * size, b * size:(b + 1) * size] for b in range(d_aux)]
            for a in range(d_aux)]


# -- polynomial-valued operators -------------------------------------------

class OperatorPoly:
    """Operator whose entries are polynomials in the spectral parameter.

    ``coeffs[k]`` is the matrix coefficient of ``u**k``.
    """

    def __init__(self, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2]:
            raise ValueError(f"expected coefficient stack of shape (deg+1, N, N), got {coeffs.shape}")
        self.coeffs = coeffs
        self.coeffs.flags.writeable = False

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1:]

    def __call__(self, u: complex) -> np.ndarray:
        out = np.array(self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            out = out * u + c
        return out

    def derivative(self) -> "OperatorPoly":
        if self.degree == 0:
            return OperatorPoly(np.zeros_like(self.coeffs))
        k = np.arange(1, self.degree + 1)[:, None, None]
        return OperatorPoly(self.coeffs[1:] * k)


def chebyshev_nodes(count: int, scale: float = 1.0) -> np.ndarray:
    k = np.arange(count)
    return scale * np.cos((2 * k + 1) * np.pi / (2 * count))


def poly_interpolate(points: Sequence[complex], values: Sequence[np.ndarray], degree: int) -> OperatorPoly:
    """Entrywise interpolation of operator samples by a polynomial of given degree.

    Uses exactly ``degree + 1`` samples; callers hold out extra samples to
    certify the degree.
    """
    pts = np.asarray(points, dtype=complex)
    if len(pts) < degree + 1:
        raise ValueError(f"need {degree + 1} samples for degree {degree}, got {len(pts)}")
    pts = pts[: degree + 1]
    if len(np.unique(np.round(pts, 14))) != len(pts):
        raise ValueError("interpolation points must be distinct")
    vals = np.stack([np.asarray(v, dtype=complex) for v in values[: degree + 1]])
    vander = np.vander(pts, degree + 1, increasing=True)
    flat = vals.reshape(degree + 1, -1)
    coeffs = np.linalg.solve(vander, flat).reshape(vals.shape)
    return OperatorPoly(coeffs)
