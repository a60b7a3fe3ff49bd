import math

import numpy as np
import pytest

import susyoptics as so
from susyoptics import ConfigurationError, ContractError, DegenerateStateError, SamplingError


def test_grid_geometry():
    g = so.make_grid(256, -8.0, 8.0)
    assert g.n == 256
    assert g.dx == pytest.approx(16.0 / 256)
    # periodic FFT convention: x_max itself is not a sample
    assert g.x[0] == -8.0
    assert g.x[-1] == pytest.approx(8.0 - g.dx)
    assert g.dp == pytest.approx(2.0 * math.pi / 16.0)
    np.testing.assert_allclose(g.p, 2.0 * math.pi * np.fft.fftfreq(256, g.dx))


def test_grid_arrays_read_only():
    g = so.make_grid(64, -1.0, 1.0)
    with pytest.raises(ValueError):
        g.x[0] = 0.0
    with pytest.raises(ValueError):
        g.p[0] = 0.0


@pytest.mark.parametrize("n,lo,hi", [
    (1, -1.0, 1.0),
    (64, 1.0, -1.0),
    (64, 0.0, 0.0),
    (64, -math.inf, 1.0),
])
def test_make_grid_rejects_bad_input(n, lo, hi):
    with pytest.raises(ConfigurationError):
        so.make_grid(n, lo, hi)


def test_make_grid_collects_all_problems():
    with pytest.raises(ConfigurationError) as err:
        so.make_grid(0, 2.0, float("nan"))
    text = str(err.value)
    assert "n" in text and "finite" in text


def test_wavefunction_contract(small_grid):
    with pytest.raises(ContractError):
        so.WaveFunction(small_grid, np.zeros(small_grid.n - 1))
    with pytest.raises(ContractError):
        so.WaveFunction(small_grid, np.zeros(small_grid.n), representation="angle")
    psi = so.WaveFunction(small_grid, np.ones(small_grid.n))
    assert psi.values.dtype == np.complex128
    with pytest.raises(ValueError):
        psi.values[0] = 0.0
    other = psi.with_values(2.0 * psi.values)
    assert other.representation == psi.representation
    assert other.values[0] == 2.0 + 0.0j


def test_sample_names_bad_point(small_grid):
    psi = so.sample(small_grid, lambda x: np.exp(-x * x))
    assert psi.values.shape == (small_grid.n,)

    def bad(x):
        return np.where(np.abs(x + 3.0) < 1e-9, np.nan, 1.0)

    with pytest.raises(SamplingError) as err:
        so.sample(small_grid, bad)
    assert "-3" in str(err.value)


def test_sample_scalar_broadcast(small_grid):
    psi = so.sample(small_grid, lambda x: 1.0)
    assert np.all(psi.values == 1.0)


def test_gaussian_packet_normalized(grid):
    psi = so.gaussian_packet(grid, center=-5.0, width=1.0, momentum=2.0)
    assert so.norm(psi) == pytest.approx(1.0, abs=1e-12)
    # mean momentum matches the boost
    phi = so.to_momentum(psi)
    p_mean = np.sum(grid.p * np.abs(phi.values) ** 2) * grid.dp
    assert p_mean == pytest.approx(2.0, abs=1e-9)


def test_momentum_roundtrip_and_parseval(grid, psi0):
    phi = so.to_momentum(psi0)
    assert phi.representation == so.MOMENTUM
    assert so.norm(phi) == pytest.approx(so.norm(psi0), abs=1e-12)
    back = so.to_position(phi)
    np.testing.assert_allclose(back.values, psi0.values, atol=1e-12)
    with pytest.raises(ContractError):
        so.to_momentum(phi)
    with pytest.raises(ContractError):
        so.to_position(psi0)


def test_momentum_transform_matches_analytic(grid):
    # FT of exp(-x^2/2)/pi^(1/4) is exp(-p^2/2)/pi^(1/4) in the unitary convention
    psi = so.gaussian_packet(grid)
    phi = so.to_momentum(psi)
    expected = np.pi ** -0.25 * np.exp(-grid.p ** 2 / 2.0)
    np.testing.assert_allclose(phi.values, expected, atol=1e-12)


def test_inner_requires_matching_frames(grid, small_grid, psi0):
    phi = so.to_momentum(psi0)
    with pytest.raises(ContractError):
        so.inner(psi0, phi)
    other = so.gaussian_packet(small_grid)
    with pytest.raises(ContractError):
        so.inner(psi0, other)


def test_inner_is_conjugate_linear(grid):
    a = so.gaussian_packet(grid, center=1.0)
    b = so.gaussian_packet(grid, center=-1.0, momentum=1.0)
    assert so.inner(a, b) == pytest.approx(np.conj(so.inner(b, a)))
    assert so.inner(a, a.with_values(2j * a.values)) == pytest.approx(2j * so.inner(a, a))


@pytest.mark.parametrize("convention,expected", [
    ("modulus", 1.0),
    ("modulus_squared", 1.0),
])
def test_fidelity_self(grid, psi0, convention, expected):
    # scaling must not matter: fidelity normalizes internally
    scaled = psi0.with_values(3.7j * psi0.values)
    assert so.fidelity(psi0, scaled, convention=convention) == pytest.approx(expected, abs=1e-12)


def test_fidelity_convention_squares(grid):
    a = so.gaussian_packet(grid, center=0.0)
    b = so.gaussian_packet(grid, center=1.0)
    f = so.fidelity(a, b)
    f2 = so.fidelity(a, b, convention="modulus_squared")
    assert 0.0 < f < 1.0
    assert f2 == pytest.approx(f * f, rel=1e-12)
    with pytest.raises(ConfigurationError):
        so.fidelity(a, b, convention="overlap")


def test_fidelity_zero_state_rejected(small_grid):
    zero = so.WaveFunction(small_grid, np.zeros(small_grid.n))
    good = so.gaussian_packet(small_grid)
    with pytest.raises(DegenerateStateError):
        so.fidelity(zero, good)
    with pytest.raises(DegenerateStateError):
        so.normalized(zero)


def test_spectral_derivative_gaussian(grid):
    psi = so.gaussian_packet(grid, width=1.5)
    d = so.spectral_derivative(psi)
    expected = -(grid.x / 1.5**2) * psi.values
    np.testing.assert_allclose(d.values, expected, atol=1e-10)


def test_spectral_derivative_plane_wave_exact(small_grid):
    # a lattice momentum is differentiated exactly
    k = 5 * small_grid.dp
    psi = so.WaveFunction(small_grid, np.exp(1j * k * small_grid.x))
    d = so.spectral_derivative(psi)
    np.testing.assert_allclose(d.values, 1j * k * psi.values, atol=1e-11)
