import math

import numpy as np
import pytest

import susyoptics as so
from susyoptics import ConfigurationError, ContractError, NumericalError

from conftest import AMPLITUDE


def test_superpotential_values(W):
    # W(0) = A, and sigma defaults to x0/2
    assert W(0.0) == pytest.approx(AMPLITUDE)
    assert W.x0 == pytest.approx(1.0)
    assert so.Superpotential(1.0, AMPLITUDE).sigma == pytest.approx(0.5)
    # far from the barrier the linear trap dominates
    assert W(10.0) == pytest.approx(10.0, abs=1e-12)


def test_superpotential_derivative_matches_fd(W):
    x = np.linspace(-8.0, 8.0, 1601)
    h = 1e-6
    fd = (W.value(x + h) - W.value(x - h)) / (2.0 * h)
    np.testing.assert_allclose(W.derivative(x), fd, atol=1e-7)


@pytest.mark.parametrize("kwargs", [
    dict(omega=0.0, amplitude=1.0),
    dict(omega=-1.0, amplitude=1.0),
    dict(omega=1.0, amplitude=math.nan),
    dict(omega=1.0, amplitude=1.0, sigma=0.0),
])
def test_superpotential_rejects_bad_params(kwargs):
    with pytest.raises(ConfigurationError):
        so.Superpotential(**kwargs)


def test_partner_potentials_pointwise(W, grid, v1, v2):
    # center values of the two partners and their exact difference W'
    i0 = int(np.argmin(np.abs(grid.x)))
    assert grid.x[i0] == 0.0
    assert v1.values[i0] == pytest.approx(13.5)
    assert v2.values[i0] == pytest.approx(12.5)
    np.testing.assert_allclose(v1.values - v2.values,
                               W.derivative(grid.x), atol=1e-12)
    with pytest.raises(ConfigurationError):
        so.partner_potential(W, 3, grid)


def test_eta_family_interpolates_partners(W, grid, v1, v2):
    e0 = so.eta_potential(W, 0.0, grid)
    e1 = so.eta_potential(W, 1.0, grid)
    # eta = 0 is the even part shared by both partners, offset by omega/2
    np.testing.assert_allclose(e0.values, v1.values - 0.5, atol=1e-12)
    np.testing.assert_allclose(e1.values, v2.values + 0.5, atol=1e-12)
    # eta = -1 mirrors eta = +1; grid reflection pairs x_j with x_(n-j)
    em = so.eta_potential(W, -1.0, grid)
    mirrored = np.roll(em.values[::-1], 1)
    np.testing.assert_allclose(mirrored[1:], e1.values[1:], atol=1e-12)


def test_eta_family_requires_matched_widths(grid):
    wide = so.Superpotential(1.0, AMPLITUDE, sigma=0.7)
    with pytest.raises(ConfigurationError):
        so.eta_potential(wide, 1.0, grid)


def test_potential_field_contract(small_grid):
    with pytest.raises(ContractError):
        so.PotentialField(small_grid, np.zeros(small_grid.n - 2))
    with pytest.raises(ContractError):
        so.PotentialField(small_grid, np.full(small_grid.n, np.nan))
    field = so.PotentialField(small_grid, np.zeros(small_grid.n))
    with pytest.raises(ValueError):
        field.values[0] = 1.0


class TestTabulatedSuperpotential:
    def test_linear_samples_accepted(self, small_grid):
        tab = so.TabulatedSuperpotential(small_grid, small_grid.x,
                                         np.ones(small_grid.n))
        x = np.linspace(-11.0, 11.0, 37)
        np.testing.assert_allclose(tab.value(x), x, atol=1e-12)
        np.testing.assert_allclose(tab.derivative(x), 1.0, atol=1e-12)

    def test_inconsistent_derivative_rejected(self, small_grid):
        with pytest.raises(ConfigurationError):
            so.TabulatedSuperpotential(small_grid, small_grid.x,
                                       2.0 * np.ones(small_grid.n))

    def test_smooth_profile_needs_fine_grid(self, W, grid):
        # the barrier's curvature defeats centered differences at 2048 points
        with pytest.raises(ConfigurationError):
            so.TabulatedSuperpotential(grid, W.value(grid.x),
                                       W.derivative(grid.x))
        fine = so.make_grid(32768, -15.0, 15.0)
        tab = so.TabulatedSuperpotential(fine, W.value(fine.x),
                                         W.derivative(fine.x))
        # linear interpolation between samples: error is W'' dx^2 / 8
        assert tab.value(0.25) == pytest.approx(W(0.25), abs=1e-6)

    def test_tolerance_is_configurable(self, W, grid):
        tab = so.TabulatedSuperpotential(grid, W.value(grid.x),
                                         W.derivative(grid.x), fd_rel_tol=1e-3)
        assert tab.derivative(0.0) == pytest.approx(W.derivative(0.0))

    def test_out_of_domain_rejected(self, small_grid):
        tab = so.TabulatedSuperpotential(small_grid, small_grid.x,
                                         np.ones(small_grid.n))
        with pytest.raises(ContractError):
            tab.value(13.0)


class TestLadderOperators:
    def test_adjointness(self, grid, W, battery):
        # <B phi, psi> = <phi, B+ psi> for smooth states
        for phi, psi in zip(battery[:-1], battery[1:]):
            lhs = so.inner(so.apply_B(phi, W), psi)
            rhs = so.inner(phi, so.apply_B_dag(psi, W))
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_requires_position_representation(self, grid, W, psi0):
        phi = so.to_momentum(psi0)
        with pytest.raises(ContractError):
            so.apply_B(phi, W)
        with pytest.raises(ContractError):
            so.apply_B_dag(phi, W)

    def test_factorization_reproduces_hamiltonians(self, grid, W, v1, v2, battery):
        # B B+ acts as kinetic + V1, B+ B as kinetic + V2, on smooth states
        psi = battery[0]
        kinetic = so.spectral_derivative(so.spectral_derivative(psi))
        for apply_outer, apply_inner, v in ((so.apply_B, so.apply_B_dag, v1),
                                            (so.apply_B_dag, so.apply_B, v2)):
            lhs = apply_outer(apply_inner(psi, W), W)
            rhs = psi.with_values(-0.5 * kinetic.values + v.values * psi.values)
            np.testing.assert_allclose(lhs.values, rhs.values, atol=1e-8)

    def test_zero_mode_annihilated(self, grid, W):
        z0 = so.zero_mode(W, grid)
        assert so.norm(z0) == pytest.approx(1.0, abs=1e-12)
        assert so.norm(so.apply_B(z0, W)) < 1e-8


def test_zero_mode_is_partner_ground_state(grid, W, v2):
    z0 = so.zero_mode(W, grid)
    s2 = so.bound_spectrum(v2, 1)
    assert so.fidelity(z0, s2.states[0]) > 1.0 - 1e-8


def test_zero_mode_from_tabulated_matches_analytic(W):
    fine = so.make_grid(32768, -15.0, 15.0)
    tab = so.TabulatedSuperpotential(fine, W.value(fine.x), W.derivative(fine.x))
    za = so.zero_mode(W, fine)
    zt = so.zero_mode(tab, fine)
    assert so.fidelity(za, zt) > 1.0 - 1e-10


class TestBoundSpectrum:
    def test_level_count_validated(self, v1):
        with pytest.raises(ConfigurationError):
            so.bound_spectrum(v1, 0)
        with pytest.raises(ConfigurationError):
            so.bound_spectrum(v1, 17)
        with pytest.raises(ConfigurationError):
            so.bound_spectrum(v1, 4, method="shooting")

    def test_states_orthonormal(self, v1):
        s = so.bound_spectrum(v1, 6)
        vecs = np.stack([st.values for st in s.states])
        gram = (vecs.conj() @ vecs.T).real * s.grid.dx
        np.testing.assert_allclose(gram, np.eye(6), atol=1e-10)
        assert np.all(np.diff(s.energies) > 0)
        assert np.all(s.residuals < 1e-8)

    def test_sign_convention_deterministic(self, v1):
        a = so.bound_spectrum(v1, 3)
        b = so.bound_spectrum(v1, 3)
        for sa, sb in zip(a.states, b.states):
            np.testing.assert_array_equal(sa.values, sb.values)

    def test_fd_method_agrees_to_its_accuracy(self, v1):
        dense = so.bound_spectrum(v1, 4)
        fd = so.bound_spectrum(v1, 4, method="fd")
        assert fd.method == "fd"
        np.testing.assert_allclose(fd.energies, dense.energies, atol=5e-3)

    def test_fd_box_energy(self, grid):
        # flat potential: lowest level of the hard box, pi^2 / (2 L^2)
        flat = so.PotentialField(grid, np.zeros(grid.n), label="flat")
        coarse_grid = so.make_grid(512, -15.0, 15.0)
        coarse = so.PotentialField(coarse_grid, np.zeros(coarse_grid.n), label="flat")
        L = 30.0
        analytic = math.pi**2 / (2.0 * L**2)
        e_fine = so.bound_spectrum(flat, 1, method="fd").energies[0]
        e_coarse = so.bound_spectrum(coarse, 1, method="fd").energies[0]
        assert e_fine == pytest.approx(analytic, rel=2e-3)
        assert abs(e_fine - analytic) < abs(e_coarse - analytic)

    def test_residual_gate_raises(self, v1):
        with pytest.raises(NumericalError):
            so.bound_spectrum(v1, 4, residual_tol=1e-16)


def test_hamiltonian_matrices_are_symmetric(v1):
    tri = so.hamiltonian_matrix(v1)
    dense = so.dense_hamiltonian(v1)
    np.testing.assert_array_equal(tri, tri.T)
    np.testing.assert_array_equal(dense, dense.T)
    # both discretize the same operator: quadratic forms agree on smooth states
    psi = so.gaussian_packet(v1.grid, center=-5.0)
    vals = psi.values.real
    e_tri = vals @ tri @ vals * v1.grid.dx
    e_dense = vals @ dense @ vals * v1.grid.dx
    assert e_tri == pytest.approx(e_dense, rel=1e-4)


def test_check_degeneracy_pairs_partner_levels(v1, v2):
    s1 = so.bound_spectrum(v1, 8)
    s2 = so.bound_spectrum(v2, 9)
    report = so.check_degeneracy(s1, s2, tol=1e-6)
    assert report.pair_count == 8
    assert report.passed
    assert report.max_gap <= 1e-6
    assert abs(report.unpaired_ground) <= 1e-6


def test_check_degeneracy_grid_mismatch(v1, small_grid):
    flat = so.PotentialField(small_grid, np.zeros(small_grid.n), label="flat")
    other = so.bound_spectrum(flat, 3)
    mine = so.bound_spectrum(v1, 3)
    with pytest.raises(ContractError):
        so.check_degeneracy(mine, other, tol=1e-6)


class TestHarmonicLimit:
    """A = 0 turns the barrier off; everything is analytic."""

    def test_spectra(self, grid):
        w0 = so.Superpotential(1.0, 0.0)
        h1 = so.partner_potential(w0, 1, grid)
        h2 = so.partner_potential(w0, 2, grid)
        e1 = so.bound_spectrum(h1, 8).energies
        e2 = so.bound_spectrum(h2, 8).energies
        np.testing.assert_allclose(e1, np.arange(8) + 1.0, atol=1e-9)
        np.testing.assert_allclose(e2, np.arange(8), atol=1e-9)

    def test_zero_mode_is_gaussian(self, grid):
        w0 = so.Superpotential(1.0, 0.0)
        z0 = so.zero_mode(w0, grid)
        assert so.fidelity(z0, so.gaussian_packet(grid)) > 1.0 - 1e-12

    def test_ladder_shifts_levels(self, grid):
        w0 = so.Superpotential(1.0, 0.0)
        h1 = so.partner_potential(w0, 1, grid)
        h2 = so.partner_potential(w0, 2, grid)
        s1 = so.bound_spectrum(h1, 3)
        s2 = so.bound_spectrum(h2, 4)
        for n in range(3):
            lifted = so.apply_B_dag(s1.states[n], w0)
            assert so.fidelity(lifted, s2.states[n + 1]) > 1.0 - 1e-9
