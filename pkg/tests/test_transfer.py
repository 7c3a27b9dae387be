import numpy as np
import pytest
from hypothesis import given, strategies as st

from susytj.kernels import ModelParams, random_params, table_params
from susytj.reference import REFERENCE_L2, REFERENCE_L3
from susytj.transfer import (MAX_TRANSFER_SITES, build_transfer, diagonalize, hamiltonian_direct,
                             hamiltonian_from_transfer, nested_transfer, nested_transfer_bar,
                             nested_transfer_pregauge, number_operator, sort_spectrum, transfer_matrix,
                             transfer_matrix_blocks)
from susytj.pipeline import commutativity, spectrum_mismatch


@pytest.mark.parametrize("L", [2, 3])
def test_commutativity_table(L):
    fam = build_transfer(table_params(L))
    assert commutativity(fam, n_pairs=10, seed=L) <= 1e-9


def test_commutativity_inhomogeneous():
    p = table_params(2).with_theta([0.13, -0.07 + 0.02j])
    fam = build_transfer(p)
    assert commutativity(fam, n_pairs=5) <= 1e-9


@given(st.integers(0, 10**6))
def test_commutativity_random_params(seed):
    fam = build_transfer(random_params(np.random.default_rng(seed)))
    assert commutativity(fam, n_pairs=2, seed=seed) <= 1e-9


def test_two_transfer_routes_agree():
    p = table_params(2)
    for u in (0.0, 0.31 - 0.2j, 1.1j):
        a, b = transfer_matrix(u, p), transfer_matrix_blocks(u, p)
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.abs(a).max())


def test_polynomial_family_matches_direct_evaluation():
    p = table_params(2)
    fam = build_transfer(p)
    assert fam.poly.degree == 2 * p.L + 2
    for u in (2.3 + 0.1j, -0.77):
        ref = transfer_matrix(u, p)
        assert np.max(np.abs(fam(u) - ref)) <= 1e-9 * np.abs(ref).max()


def test_transfer_cap():
    p = table_params(2).with_length(MAX_TRANSFER_SITES + 1)
    with pytest.raises(ValueError):
        transfer_matrix(0.1, p)


@pytest.mark.parametrize("L", [2, 3])
def test_hamiltonian_routes_agree(L):
    p = table_params(L)
    a = diagonalize(hamiltonian_direct(p)).eigenvalues
    b = diagonalize(hamiltonian_from_transfer(p)).eigenvalues
    assert spectrum_mismatch(a, b) <= 1e-8


def test_hamiltonian_routes_random(random_sets):
    for p in random_sets[:5]:
        a = diagonalize(hamiltonian_direct(p)).eigenvalues
        b = diagonalize(hamiltonian_from_transfer(p)).eigenvalues
        assert spectrum_mismatch(a, b) <= 1e-8


@pytest.mark.parametrize("rows,L", [(REFERENCE_L2, 2), (REFERENCE_L3, 3)])
def test_spectrum_matches_reference_energies(rows, L):
    ev = diagonalize(hamiltonian_direct(table_params(L))).eigenvalues
    assert np.max(np.abs(ev.imag)) < 1e-9
    got = np.sort(ev.real)
    want = np.sort([r.energy for r in rows])
    assert np.max(np.abs(got - want)) <= 1e-5


def test_particle_number_conserved():
    p = table_params(3)
    H = hamiltonian_direct(p)
    N = number_operator(3)
    assert np.max(np.abs(H @ N - N @ H)) == 0


def test_diagonalize_certificate_and_order():
    p = table_params(2)
    spec = diagonalize(hamiltonian_direct(p))
    assert np.all(spec.residuals < 1e-10)
    assert np.all(np.diff(spec.eigenvalues.real) >= -1e-7)
    lines = spec.to_csv().splitlines()
    assert lines[0] == "n,re_E,im_E,residual,source"
    assert len(lines) == 10


def test_sort_spectrum_buckets_real_parts():
    vals = np.array([1.0 + 1j, 1.0 + 1e-9 - 1j, 0.5])
    assert list(sort_spectrum(vals)) == [2, 1, 0]


class TestNested:
    p = table_params(2)
    lams = (0.31 + 0.2j, -0.4 + 0.05j)

    def test_commuting(self):
        a = nested_transfer_bar(0.27 - 0.1j, self.lams, self.p)
        b = nested_transfer_bar(-0.6 + 0.33j, self.lams, self.p)
        assert np.max(np.abs(a @ b - b @ a)) <= 1e-12 * np.abs(a).max() * np.abs(b).max()

    def test_pregauge_equals_lambda_form(self):
        eta = self.p.eta
        us = [x - eta / 2 for x in self.lams]
        u = 0.21 + 0.4j
        assert np.allclose(nested_transfer_pregauge(u, us, self.p), nested_transfer(u + eta / 2, self.lams, self.p))

    def test_pole_at_zero(self):
        with pytest.raises(ZeroDivisionError):
            nested_transfer(0, self.lams, self.p)
        assert np.all(np.isfinite(nested_transfer_bar(0, self.lams, self.p)))

    def test_empty_chain_rejected(self):
        with pytest.raises(ValueError):
            nested_transfer_bar(0.1, (), self.p)


def test_diagonal_limit_consistency():
    p = ModelParams(0.25, 0.3, 1.0, 0.0, -0.4, 0.0, 0.0, mu=1.0, L=3)
    fam = build_transfer(p)
    assert commutativity(fam, n_pairs=10) <= 1e-9
    a = diagonalize(hamiltonian_direct(p)).eigenvalues
    b = diagonalize(hamiltonian_from_transfer(p, fam)).eigenvalues
    assert spectrum_mismatch(a, b) <= 1e-8
