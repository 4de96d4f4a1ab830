import math
import warnings

import numpy as np
import pytest

import oracles
from ionforge import chain
from ionforge.chain import ChainConfig
from ionforge.errors import DomainError, PreconditionError
from ionforge.trap import CA40

TWO_PI = 2 * math.pi
W200 = TWO_PI * 200e3
W100 = TWO_PI * 100e3


def test_length_scale_values():
    assert chain.length_scale(W200) == pytest.approx(13.0e-6, abs=0.05e-6)
    assert chain.length_scale(W100) == pytest.approx(20.6e-6, abs=0.1e-6)


def test_length_scale_power_law():
    assert chain.length_scale(4 * W200) == pytest.approx(chain.length_scale(W200) / 4 ** (2 / 3), rel=1e-12)


def test_length_scale_zero_frequency():
    with pytest.raises(DomainError):
        chain.length_scale(0.0)


def test_single_ion_at_centre():
    modes = chain.chain_modes(ChainConfig(1, W200))
    assert modes.u.tolist() == [0.0]
    assert modes.mode_frequencies == pytest.approx([W200])
    assert modes.min_spacing is None
    assert chain.min_spacing(ChainConfig(1, W200)) is None


def test_two_ions_closed_form():
    u, _ = chain.solve_equilibrium(2)
    np.testing.assert_allclose(u, [-(0.25 ** (1 / 3)), 0.25 ** (1 / 3)], atol=1e-12)
    np.testing.assert_allclose(u, oracles.brute_force_equilibrium(2), atol=1e-7)
    assert u[1] - u[0] == pytest.approx(1.2599, abs=1e-4)
    assert chain.min_spacing(ChainConfig(2, W200)) == pytest.approx(16.4e-6, abs=0.05e-6)
    assert chain.min_spacing(ChainConfig(2, W100)) == pytest.approx(26.0e-6, abs=0.05e-6)


def test_three_ions():
    u, _ = chain.solve_equilibrium(3)
    np.testing.assert_allclose(u, [-1.0772, 0.0, 1.0772], atol=5e-5)
    np.testing.assert_allclose(u, oracles.brute_force_equilibrium(3), atol=1e-8)


def test_force_balance_residuals():
    for n in range(1, 12):
        u, err = chain.solve_equilibrium(n)
        assert err < 1e-10
        assert np.max(np.abs(oracles.chain_gradient(u))) < 1e-9


@pytest.mark.parametrize("n", range(2, 7))
def test_positions_match_brute_force(n):
    ell = chain.length_scale(W200)
    cm = chain.equilibrium_positions(ChainConfig(n, W200))
    ref = oracles.brute_force_equilibrium(n) * ell
    assert np.max(np.abs(cm.positions - ref)) < 1e-7 * ell


@pytest.mark.parametrize("n", range(1, 16))
def test_position_invariants(n):
    u, _ = chain.solve_equilibrium(n)
    assert np.all(np.diff(u) > 0)
    assert abs(u.sum()) < 1e-9
    np.testing.assert_allclose(u, -u[::-1], atol=1e-9)


def test_two_ion_modes():
    modes = chain.chain_modes(ChainConfig(2, W200))
    np.testing.assert_allclose(modes.eigenvalues, [1.0, 3.0], atol=1e-12)
    np.testing.assert_allclose(modes.mode_frequencies, [W200, math.sqrt(3) * W200], rtol=1e-12)


def test_three_ion_modes_and_fd_hessian():
    modes = chain.chain_modes(ChainConfig(3, W200))
    np.testing.assert_allclose(modes.eigenvalues, [1.0, 3.0, 29 / 5], atol=1e-9)
    fd = np.linalg.eigvalsh(oracles.finite_difference_hessian(modes.u))
    np.testing.assert_allclose(fd, [1.0, 3.0, 29 / 5], atol=1e-6)


@pytest.mark.parametrize("n", range(1, 11))
def test_mode_invariants(n):
    modes = chain.chain_modes(ChainConfig(n, W200))
    assert modes.mode_frequencies[0] == pytest.approx(W200, rel=1e-10)
    cm = modes.mode_vectors[:, 0]
    assert np.ptp(cm) < 1e-8
    if n >= 2:
        assert modes.eigenvalues[1] == pytest.approx(3.0, abs=1e-8)
    v = modes.mode_vectors
    assert np.max(np.abs(v.T @ v - np.eye(n))) < 1e-10
    assert np.all(np.diff(modes.eigenvalues) > 0)


def test_modes_reject_non_equilibrium():
    cm = chain.equilibrium_positions(ChainConfig(3, W200))
    bad = chain.ChainModes(cm.length_scale, cm.u * 1.01, cm.positions * 1.01, W200)
    with pytest.raises(PreconditionError):
        chain.axial_normal_modes(bad)


def test_zero_ions_rejected():
    with pytest.raises(DomainError):
        ChainConfig(0, W200)


def test_large_chain_converges():
    u, err = chain.solve_equilibrium(40)
    assert err < 1e-10


def test_lamb_dicke_single_ion():
    ld = chain.lamb_dicke_cm(ChainConfig(1, W200), 732e-9, 0.0)
    assert ld.eta == pytest.approx(0.216, abs=0.002)
    # Recoil-energy route: eta^2 = E_recoil / (hbar omega).
    from scipy import constants

    k = 2 * math.pi / 732e-9
    e_rec = (constants.hbar * k) ** 2 / (2 * CA40.mass)
    assert ld.eta == pytest.approx(math.sqrt(e_rec / (constants.hbar * W200)), rel=1e-12)


def test_lamb_dicke_orthogonal_beam():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        ld = chain.lamb_dicke_cm(ChainConfig(1, W200), 732e-9, math.pi / 2)
    assert ld.eta == 0.0 and ld.no_axial_coupling
    assert any(issubclass(w.category, RuntimeWarning) for w in rec)


def test_lamb_dicke_n_scaling():
    e1 = chain.lamb_dicke_cm(ChainConfig(1, W200), 732e-9).eta
    e4 = chain.lamb_dicke_cm(ChainConfig(4, W200), 732e-9).eta
    assert e4 == pytest.approx(e1 / 2, rel=1e-12)


def test_lamb_dicke_rejects_bad_wavelength():
    with pytest.raises(DomainError):
        chain.lamb_dicke_cm(ChainConfig(1, W200), 0.0)
