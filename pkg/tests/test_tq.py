import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from susytj.kernels import ModelParams, random_params, table_params
from susytj.reference import REFERENCE_L2, reference_rows
from susytj.roots import _jacobian, newton_refine
from susytj.tq import (BetheRootSet, PoleError, TQContext, K2, K3, abar, bae_level1_nested_form, bae_residuals,
                       bae_residue_form, dbar, energy, functional_checks, h_direct, lambda_bar, lambda_from_nested,
                       lambda_nested, lambda_tq, max_residual, q1, q2, reports_to_json)

ROW3 = REFERENCE_L2[2].roots


def test_root_set_validation_and_roundtrip():
    with pytest.raises(ValueError):
        BetheRootSet((0.1,), ())
    r = BetheRootSet((0.1 + 0.2j, -0.3), (1j, 0.5))
    assert r.M == 2
    assert BetheRootSet.from_dict(json.loads(json.dumps(r.to_dict()))) == r
    assert BetheRootSet.from_vector(r.as_vector()) == r
    assert np.allclose(r.w(0.2), (0.1 + 1j, 0.6))


def test_h_table_value():
    ctx = TQContext(table_params(2))
    assert np.isclose(ctx.s_minus, 0.8) and np.isclose(ctx.s_plus, 1.6)
    assert np.isclose(ctx.h, -0.0125714285714285, atol=1e-14)
    assert np.isclose(ctx.h, h_direct(ctx.params), atol=1e-14)


@given(st.integers(0, 10**6))
def test_h_vanishes_for_diagonal_boundaries(seed):
    p = random_params(np.random.default_rng(seed), diagonal=True)
    assert TQContext(p).h == 0


@given(st.integers(0, 10**6))
def test_crossing_of_building_blocks(seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    ctx = TQContext(p)
    roots = BetheRootSet(rng.standard_normal(2) + 1j * rng.standard_normal(2),
                         rng.standard_normal(2) + 1j * rng.standard_normal(2))
    eta = p.eta
    for lam in rng.uniform(-1, 1, 10) + 1j * rng.uniform(-1, 1, 10):
        assert abs(K3(lam, ctx) - K2(-lam + eta, ctx)) <= 1e-12 * max(1, abs(K3(lam, ctx)))
        assert abs(dbar(lam, roots, eta) - abar(-lam + eta, roots, eta)) <= 1e-12 * max(1, abs(dbar(lam, roots, eta)))
        assert abs(q2(lam, roots, eta) - q2(-lam + eta, roots, eta)) <= 1e-12 * max(1, abs(q2(lam, roots, eta)))


def test_q_invariances():
    eta = 0.2
    r = BetheRootSet((0.3 + 0.1j,), (0.7j,))
    flipped = BetheRootSet((-0.3 - 0.1j - eta,), (-0.7j,))
    for z in (0.1, 0.4 - 0.3j):
        assert np.isclose(q1(z, r, eta), q1(z, flipped, eta))
        assert np.isclose(q2(z, r, eta), q2(z, flipped, eta))


def test_bae_residual_sizes_row3(table_L2):
    ctx = table_L2.ctx
    refined = newton_refine(ROW3, ctx)
    assert refined.residual <= 1e-11
    # printed roots are the refined ones rounded to 4 decimals
    dev = np.abs(ROW3.as_vector() - refined.roots.as_vector()).max()
    assert dev <= 5e-5 * np.sqrt(2)
    # so the printed residual is bounded by the first-order rounding estimate
    jac = _jacobian(refined.roots.as_vector(), ctx, 1e-7)
    bound = np.abs(jac).sum(axis=1).max() * 5e-5 * np.sqrt(2)
    assert max_residual(ROW3, ctx) <= bound
    assert 1e-4 < max_residual(ROW3, ctx) < 5e-3


def test_bae_empty_for_vacuum(table_L2):
    r2, r1 = bae_residuals(BetheRootSet(), table_L2.ctx)
    assert r2.size == 0 and r1.size == 0


@pytest.mark.parametrize("row", [r.n - 1 for r in REFERENCE_L2 if r.M > 0])
def test_perturbed_roots_detected(table_L2, row):
    roots = table_L2.refined[row].roots
    bumped = BetheRootSet.from_vector(roots.as_vector() + 1e-2)
    assert max_residual(bumped, table_L2.ctx) >= 1e-3


def test_equivalent_forms_of_bethe_equations(table_L2):
    ctx = table_L2.ctx
    for sol in table_L2.refined:
        if sol.roots.M == 0:
            continue
        assert np.abs(bae_level1_nested_form(sol.roots, ctx)).max() <= 1e-9
        assert np.abs(bae_residue_form(sol.roots, ctx)).max() <= 1e-9
        # and the residue form fails once the level-2 equations fail
        bad = BetheRootSet(sol.roots.u, tuple(v + 1e-2 for v in sol.roots.nu))
        assert np.abs(bae_residue_form(bad, ctx)).max() > 1e3 * np.abs(bae_residue_form(sol.roots, ctx)).max()


def _level_eigenvalues(table, u):
    # H is non-degenerate here, so each ED eigenvector is an eigenvector of t(u)
    t = table.family(u)
    return np.array([np.vdot(v, t @ v) / np.vdot(v, v) for v in table.ed.eigenvectors.T])


def test_lambda_matches_exactly_one_level(table_L2, rng):
    """Refined roots single out one ED level of t(u), the same one at every u."""
    us = rng.uniform(-0.8, 0.8, 5) + 1j * rng.uniform(-0.8, 0.8, 5)
    for sol in table_L2.refined:
        picks = set()
        for u in us:
            ev = _level_eigenvalues(table_L2, u)
            lam = lambda_tq(u, sol.roots, table_L2.ctx)
            close = np.flatnonzero(np.abs(ev - lam) <= 1e-4 * abs(lam))
            assert len(close) == 1
            picks.add(int(close[0]))
        assert len(picks) == 1


def test_printed_roots_lambda_precision(table_L2, rng):
    """4-decimal roots reproduce Lambda(u) to a few 1e-4 at worst (observed 2.3e-4)."""
    us = rng.uniform(-0.8, 0.8, 5) + 1j * rng.uniform(-0.8, 0.8, 5)
    for row in table_L2.rows:
        for u in us:
            lam = lambda_tq(u, row.roots, table_L2.ctx)
            assert np.min(np.abs(_level_eigenvalues(table_L2, u) - lam)) <= 1e-3 * abs(lam)


def test_lambda_two_routes_agree(table_L2):
    ctx = table_L2.ctx
    for sol in table_L2.refined:
        for u in (0.37 + 0.1j, -0.2 + 0.5j):
            assert abs(lambda_from_nested(u, sol.roots, ctx) - lambda_tq(u, sol.roots, ctx)) <= 1e-10 * abs(
                lambda_tq(u, sol.roots, ctx))


def test_pole_cancellation(table_L2):
    """Limits from four directions at each root agree with the stencil value."""
    ctx = table_L2.ctx
    for sol in table_L2.refined[:5]:
        roots = sol.roots
        for z in roots.u + roots.nu:
            centre = lambda_tq(z, roots, ctx)
            for d in (1, 1j, -1, -1j):
                f = lambda t: lambda_tq(z + t * d, roots, ctx)
                limit = 2 * f(1e-5) - f(2e-5)
                assert abs(limit - centre) <= 1e-7 * max(1.0, abs(centre))


def test_pole_without_bethe_roots_raises(table_L2):
    fake = BetheRootSet((0.3,), (0.9j,))
    with pytest.raises(PoleError):
        lambda_tq(0.3, fake, table_L2.ctx)


def test_nested_eigenvalue_pole(table_L2):
    sol = table_L2.refined[2]
    with pytest.raises(PoleError):
        lambda_nested(0, sol.roots, table_L2.ctx)
    assert np.isfinite(lambda_bar(0, sol.roots, table_L2.ctx))


def test_energy_examples(table_L2):
    ctx = table_L2.ctx
    assert abs(energy(BetheRootSet((0.1005,), (3.307j,)), ctx) - (-3.32504)) < 1e-3
    assert energy(BetheRootSet(), ctx) == 0
    assert abs(energy(BetheRootSet((-0.1 - 0.0999j,), (-0.1496,)), ctx) - 0.001822) < 2e-3
    with pytest.raises(PoleError):
        energy(BetheRootSet((0.0,), (1j,)), ctx)


@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=3),
       st.randoms(use_true_random=False))
def test_energy_symmetries(us, rnd):
    ctx = TQContext(table_params(3))
    eta = ctx.eta
    if any(abs(x) < 1e-3 or abs(x + eta) < 1e-3 for x in us):
        return
    base = energy(BetheRootSet(us, [0] * len(us)), ctx)
    shuffled = list(us)
    rnd.shuffle(shuffled)
    mirrored = [-x - eta if rnd.random() < 0.5 else x for x in shuffled]
    assert abs(energy(BetheRootSet(mirrored, [0] * len(us)), ctx) - base) <= 1e-9 * max(1, abs(base))


def test_functional_relations_all_rows(table_L2):
    for sol in table_L2.refined:
        if sol.roots.M == 0:
            continue
        reps = functional_checks(sol.roots, table_L2.ctx)
        assert [r.relation for r in reps] == ["crossing", "asymptotic", "product_identity", "special_zero",
                                              "special_eta"]
        assert all(r.passed for r in reps), [(r.relation, r.max_residual) for r in reps]
        json.loads(reports_to_json(reps))


def test_asymptotic_needs_crossing_centre(table_L2):
    """Uncentred scaling carries an O(1/lambda) correction above the 1e-6 gate at |lambda| = 1e4."""
    sol = table_L2.refined[0]
    ctx = table_L2.ctx
    lam = 1e4 * np.exp(0.3j)
    coef = -2 - 4 * ctx.params.c1 * ctx.params.c2p - 4 * ctx.params.c1p * ctx.params.c2
    raw = abs(lambda_bar(lam, sol.roots, ctx) / lam ** (2 * sol.roots.M + 2) - coef) / abs(coef)
    centred = abs(lambda_bar(lam, sol.roots, ctx) / (lam - ctx.eta / 2) ** (2 * sol.roots.M + 2) - coef) / abs(coef)
    assert centred < 1e-6 < raw


def test_lambda_bar_vanishing_h_term_diagonal():
    p = ModelParams(0.2, 0.1, 0.0, 0.0, -0.5, 1.0, 0.0, mu=2.0, L=2)
    ctx = TQContext(p)
    r = BetheRootSet((0.3 + 0.1j,), (0.2j,))
    eta = p.eta
    lam = 0.41 - 0.2j
    two = ((2 * lam - 2 * eta) / (2 * lam - eta) * K2(lam, ctx) * abar(lam, r, eta) * q2(lam + eta, r, eta)
           + 2 * lam / (2 * lam - eta) * K3(lam, ctx) * dbar(lam, r, eta) * q2(lam - eta, r, eta)) / q2(lam, r, eta)
    assert lambda_bar(lam, r, ctx) == pytest.approx(two, rel=1e-14)


@pytest.mark.parametrize("row", range(9))
def test_printed_roots_close_to_solutions(table_L2, row):
    printed = reference_rows(2)[row].roots
    refined = table_L2.refined[row].roots
    assert np.max(np.abs(printed.as_vector() - refined.as_vector()), initial=0) < 5e-3
