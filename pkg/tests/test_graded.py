import numpy as np
import pytest
from hypothesis import given, strategies as st

from susytj.graded import (BFF, FERMIONIC_2, GradedSpace, OperatorPoly, chebyshev_nodes, embed, graded_permutation,
                           is_even, n_factors, plain_permutation, poly_interpolate, sign_matrix, super_tensor,
                           super_trace, super_transpose)

P = graded_permutation(BFF)
seeds = st.integers(0, 2**32 - 1)


def rand_even(rng, space, n=1):
    d = space.dim**n
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    bp = space.basis_parity(n)
    a[bp[:, None] != bp[None, :]] = 0
    return a


def rand_op(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def test_space_validation():
    with pytest.raises(ValueError):
        GradedSpace((0, 2))
    with pytest.raises(ValueError):
        GradedSpace(())
    assert BFF.dim == 3
    assert list(BFF.basis_parity(2)) == [0, 1, 1, 1, 0, 0, 1, 0, 0]


def test_single_factor_signs_trivial():
    assert np.all(sign_matrix(BFF, 1) == 1)


def test_permutation_squares_to_identity():
    assert np.allclose(P @ P, np.eye(9))
    assert np.allclose(plain_permutation(3) @ plain_permutation(3), np.eye(9))


def test_permutation_exchanges_tensor_factors():
    # P (a x b) P = b x a for even operators
    rng = np.random.default_rng(0)
    a, b = rand_even(rng, BFF), rand_even(rng, BFF)
    assert np.allclose(P @ super_tensor(a, b, BFF) @ P, super_tensor(b, a, BFF))


@pytest.mark.parametrize("sites", [[0, 1], [1, 0]])
def test_embed_two_site_identity_maps(sites):
    got = embed(P, sites, 2, BFF)
    assert np.allclose(got, P)


def test_embed_reversed_is_conjugation():
    R = 0.3 * np.eye(9) + 0.2 * P
    assert np.allclose(embed(R, [1, 0], 2, BFF), P @ R @ P)


def test_permutation_braid():
    P12, P23, P13 = (embed(P, s, 3, BFF) for s in ([0, 1], [1, 2], [0, 2]))
    assert np.allclose(P12 @ P23 @ P12, P13)
    assert np.allclose(P12 @ P23 @ P12, P23 @ P12 @ P23)


def test_embed_errors():
    with pytest.raises(ValueError):
        embed(P, [0, 0], 3, BFF)
    with pytest.raises(ValueError):
        embed(P, [0, 3], 3, BFF)
    with pytest.raises(ValueError):
        embed(P, [0], 3, BFF)
    with pytest.raises(ValueError):
        n_factors(np.eye(5), BFF)


def test_super_trace_identity():
    assert super_trace(np.eye(3), BFF) == -1
    assert super_trace(np.eye(2), FERMIONIC_2) == -2


@given(seeds)
def test_super_trace_cyclic_for_even(seed):
    rng = np.random.default_rng(seed)
    a, b = rand_even(rng, BFF), rand_even(rng, BFF)
    assert np.isclose(super_trace(a @ b, BFF), super_trace(b @ a, BFF))


@given(seeds)
def test_partial_super_trace_matches_block_sum(seed):
    rng = np.random.default_rng(seed)
    x = rand_op(rng, 27)
    got = super_trace(x, BFF, 0)
    blocks = [x[9 * a:9 * (a + 1), 9 * a:9 * (a + 1)] for a in range(3)]
    assert np.allclose(got, blocks[0] - blocks[1] - blocks[2])


@given(seeds)
def test_partial_trace_of_product_state(seed):
    rng = np.random.default_rng(seed)
    a, b = rand_even(rng, BFF), rand_even(rng, BFF)
    assert np.allclose(super_trace(super_tensor(a, b, BFF), BFF, 0), super_trace(a, BFF) * b)


@given(seeds, st.integers(0, 1))
def test_st_ist_inverse(seed, factor):
    rng = np.random.default_rng(seed)
    x = rand_op(rng, 9)
    once = super_transpose(x, BFF, factor, "st")
    assert np.allclose(super_transpose(once, BFF, factor, "ist"), x)


def test_super_transpose_bad_mode():
    with pytest.raises(ValueError):
        super_transpose(np.eye(3), BFF, 0, "bogus")
    with pytest.raises(ValueError):
        super_transpose(np.eye(3), BFF, 1)


@given(seeds)
def test_super_tensor_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rand_op(rng, 3) for _ in range(3))
    assert np.allclose(super_tensor(super_tensor(a, b, BFF), c, BFF),
                       super_tensor(a, super_tensor(b, c, BFF), BFF))


@given(seeds)
def test_super_tensor_product_rule_for_even(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (rand_even(rng, BFF) for _ in range(4))
    lhs = super_tensor(a, b, BFF) @ super_tensor(c, d, BFF)
    assert np.allclose(lhs, super_tensor(a @ c, b @ d, BFF))


def test_is_even():
    assert is_even(P, BFF)
    odd = np.zeros((3, 3))
    odd[0, 1] = 1
    assert not is_even(odd, BFF)


@given(seeds, st.integers(0, 6))
def test_interpolation_recovers_polynomial(seed, degree):
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((degree + 1, 2, 2)) + 1j * rng.standard_normal((degree + 1, 2, 2))
    poly = OperatorPoly(coeffs)
    nodes = chebyshev_nodes(degree + 1, 1.3)
    fit = poly_interpolate(nodes, [poly(x) for x in nodes], degree)
    assert np.allclose(fit.coeffs, coeffs, atol=1e-9)
    x = 0.37 - 0.2j
    h = 1e-6
    fd = (poly(x + h) - poly(x - h)) / (2 * h)
    assert np.allclose(poly.derivative()(x), fd, atol=1e-6)


def test_interpolation_guards():
    with pytest.raises(ValueError):
        poly_interpolate([0.0, 0.0], [np.eye(2), np.eye(2)], 1)
    with pytest.raises(ValueError):
        poly_interpolate([0.0], [np.eye(2)], 1)
    with pytest.raises(ValueError):
        OperatorPoly(np.zeros((2, 2)))
