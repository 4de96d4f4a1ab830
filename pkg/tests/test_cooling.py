import math
import warnings

import numpy as np
import pytest

import oracles
from ionforge import chain, cooling
from ionforge.cooling import CoolingParams, ImagingChain, ReadoutParams
from ionforge.errors import DomainError

TWO_PI = 2 * math.pi
W200 = TWO_PI * 200e3


def test_doppler_limit():
    t, n = cooling.doppler_limit(CoolingParams(), W200)
    assert t == pytest.approx(0.50e-3, abs=0.01e-3)
    assert n == pytest.approx(51.75, rel=1e-12)
    _, n2 = cooling.doppler_limit(CoolingParams(), 2 * W200)
    assert n2 == pytest.approx(n / 2, rel=1e-12)
    t2, _ = cooling.doppler_limit(CoolingParams(), 2 * W200)
    assert t2 == t


def test_sideband_spectrum_single_ion():
    modes = chain.chain_modes(chain.ChainConfig(1, W200))
    lines = cooling.sideband_spectrum(0.0, modes)
    assert [f for _, f in lines] == pytest.approx([-W200, 0.0, W200])
    assert [label for label, _ in lines] == ["red_0", "carrier", "blue_0"]


def test_sideband_spectrum_two_ions():
    w0 = TWO_PI * 1e6
    lines = cooling.sideband_spectrum(w0, chain.chain_modes(chain.ChainConfig(2, W200)))
    assert len(lines) == 5
    freqs = np.array([f for _, f in lines])
    want = w0 + np.array([-math.sqrt(3), -1, 0, 1, math.sqrt(3)]) * W200
    np.testing.assert_allclose(freqs, want, rtol=1e-12)
    # CM pair is innermost.
    assert lines[1][0] == "red_0" and lines[3][0] == "blue_0"


@pytest.mark.parametrize("n", [1, 3, 6])
def test_sideband_symmetry(n):
    w0 = TWO_PI * 5e6
    lines = cooling.sideband_spectrum(w0, chain.chain_modes(chain.ChainConfig(n, W200)))
    assert len(lines) == 2 * n + 1
    offs = np.array([f - w0 for _, f in lines])
    np.testing.assert_allclose(offs, -offs[::-1], rtol=1e-12, atol=1e-12 * w0)


def test_sideband_resolution():
    chk = cooling.sideband_resolution_check(TWO_PI * 10e3, W200)
    assert chk.passed and chk.margin == pytest.approx(20.0)
    assert not cooling.sideband_resolution_check(W200, W200).passed
    assert cooling.doppler_linewidth_check(TWO_PI * 1e6).passed
    assert not cooling.doppler_linewidth_check(TWO_PI * 20e6).passed


def test_phonon_removal_rate():
    assert cooling.phonon_removal_rate(CoolingParams()) == pytest.approx(1 / 1.08)
    fast = CoolingParams(repump_factor=1000)
    assert cooling.phonon_removal_rate(fast) == pytest.approx(925.9, abs=0.1)
    _, nbar = cooling.doppler_limit(CoolingParams(), W200)
    assert cooling.cooling_time(nbar, fast) == pytest.approx(0.056, abs=0.001)
    with pytest.raises(DomainError):
        CoolingParams(repump_factor=0.5)


def test_collection_efficiency():
    assert cooling.collection_efficiency(ReadoutParams(quantum_efficiency=1.0)) == pytest.approx(0.0199, abs=1e-4)
    assert cooling.collection_efficiency(ReadoutParams(quantum_efficiency=0.0)) == 0.0
    full = ReadoutParams(collection_solid_angle=4 * math.pi, quantum_efficiency=1.0)
    assert cooling.collection_efficiency(full) == pytest.approx(1.0)


def test_from_means():
    p = ReadoutParams.from_means(50, 1, seed=1)
    assert p.bright_mean == pytest.approx(50, rel=1e-12)
    assert p.dark_mean == pytest.approx(1, rel=1e-12)


def test_analytic_tails_vs_direct_sum():
    a = cooling.analytic_error_rates(50, 1, 10)
    assert a["bright_as_dark"] == pytest.approx(oracles.poisson_cdf_direct(10, 50), rel=1e-9)
    assert a["dark_as_bright"] == pytest.approx(oracles.poisson_sf_direct(10, 1), rel=1e-9)


def test_readout_error_rates_small(backend):
    params = ReadoutParams.from_means(50, 1, threshold=10, seed=7)
    res = cooling.simulate_readout(0.5, params, 100_000)
    assert res.bright_error_rate < 1e-3 and res.dark_error_rate < 1e-3


def test_readout_converges_to_oracle_when_overlapping(backend):
    # Overlapping distributions make both error channels measurable.
    params = ReadoutParams.from_means(8, 2, threshold=4, seed=3)
    res = cooling.simulate_readout(0.5, params, 40_000)
    for rate, n, p in (
        (res.bright_error_rate, res.n_bright, oracles.poisson_cdf_direct(4, 8)),
        (res.dark_error_rate, res.n_dark, oracles.poisson_sf_direct(4, 2)),
    ):
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(rate - p) < 3 * sigma


def test_readout_zero_integration_time():
    params = ReadoutParams(integration_time=0.0, seed=1)
    res = cooling.simulate_readout(0.5, params, 1000)
    assert res.bright_error_rate == 1.0
    assert res.classified_bright == 0
    assert res.histogram.tolist() == [1000]


def test_readout_all_bright_concentrated():
    params = ReadoutParams.from_means(200, 0.1, threshold=30, seed=2)
    res = cooling.simulate_readout(1.0, params, 20_000)
    assert res.n_bright == 20_000
    assert res.classified_bright == 20_000
    mass = res.histogram[150:251].sum() / res.trials
    # Poisson(200) mass in [150, 250] is > 0.999; allow 5 binomial sigma.
    p = sum(oracles.poisson_pmf(k, 200) for k in range(150, 251))
    assert abs(mass - p) < 5 * math.sqrt(p * (1 - p) / res.trials) + 1e-12


def test_readout_reproducible_and_lane_independent(backend):
    params = ReadoutParams.from_means(50, 1, seed=99)
    a = cooling.simulate_readout(0.3, params, 30_000)
    b = cooling.simulate_readout(0.3, params, 30_000)
    c = cooling.simulate_readout(0.3, params, 30_000, lanes=4)
    np.testing.assert_array_equal(a.histogram, b.histogram)
    np.testing.assert_array_equal(a.histogram, c.histogram)
    d = cooling.simulate_readout(0.3, ReadoutParams.from_means(50, 1, seed=100), 30_000)
    assert not np.array_equal(a.histogram, d.histogram)


def test_readout_histograms_consistent():
    res = cooling.simulate_readout([0.4, 0.6], ReadoutParams(seed=5), 10_000)
    np.testing.assert_array_equal(res.histogram, res.histogram_bright + res.histogram_dark)
    assert res.histogram.sum() == 10_000
    assert sum(f for _, f in res.histogram_rows()) == pytest.approx(1.0)


def test_readout_requires_seed_and_valid_probabilities():
    with pytest.raises(DomainError):
        cooling.simulate_readout(0.5, ReadoutParams(), 10)
    with pytest.raises(DomainError):
        cooling.simulate_readout([0.5, 0.6], ReadoutParams(seed=1), 10)
    with pytest.raises(DomainError):
        cooling.simulate_readout(0.5, ReadoutParams(seed=1), 0)


def test_readout_threshold_warning():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        cooling.simulate_readout(0.5, ReadoutParams(threshold=10_000, seed=1), 10)
    assert any("threshold" in str(w.message) for w in rec)


def test_imaging():
    sep = cooling.imaging_min_separation(ImagingChain())
    assert sep == pytest.approx(4.8e-6, abs=1e-12)
    assert cooling.imaging_resolvable(25e-6)
    assert cooling.imaging_min_separation(ImagingChain(magnification=1e9)) < 1e-12
    # Two 12 um pitches would give 3.2 um; three give the 36 um figure.
    assert ImagingChain().mcp_separation == pytest.approx(36e-6)
