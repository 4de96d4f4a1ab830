import math

import pytest
from hypothesis import given, strategies as st

import oracles
from ionforge.errors import DomainError
from ionforge.trap import (
    CA40,
    IonSpecies,
    Q_STABILITY_LIMIT,
    TrapParams,
    axial_frequency,
    mathieu_q,
    secular_frequencies,
    stability_report,
    u_dc_for_axial,
)

TWO_PI = 2 * math.pi
NOMINAL = TrapParams(v_rf=300, omega_rf=TWO_PI * 10e6, r0=0.85e-3, u_dc=27.3, z0=5e-3, kappa=0.3)


def test_species_catalog():
    labels = {t.label: t for t in CA40.transitions}
    assert labels["S1/2-P1/2"].wavelength == pytest.approx(397e-9, rel=1e-2)
    assert labels["S1/2-D3/2"].wavelength == pytest.approx(732e-9, rel=1e-2)
    assert labels["S1/2-D3/2"].lifetime == pytest.approx(1.08)
    assert labels["D3/2-P1/2"].wavelength == pytest.approx(866e-9, rel=1e-2)
    assert labels["S1/2-D5/2"].wavelength == pytest.approx(729e-9, rel=1e-2)


def test_species_rejects_bad_mass():
    with pytest.raises(DomainError):
        IonSpecies("x", -1.0, 1.0)


def test_q_nominal_point():
    assert mathieu_q(NOMINAL) == pytest.approx(0.507, abs=1.5e-3)


def test_q_zero_drive():
    assert mathieu_q(TrapParams(v_rf=0.0)) == 0.0


def test_q_doubling_r0_quarters():
    q1 = mathieu_q(NOMINAL)
    q2 = mathieu_q(TrapParams(r0=2 * NOMINAL.r0))
    assert q2 == pytest.approx(q1 / 4, rel=1e-12)
    assert q2 == pytest.approx(0.127, abs=1e-3)


@pytest.mark.parametrize("field", ["omega_rf", "r0", "z0", "kappa"])
def test_nonpositive_inputs_rejected(field):
    from dataclasses import replace

    with pytest.raises(DomainError):
        mathieu_q(replace(NOMINAL, **{field: 0.0}))
    with pytest.raises(DomainError):
        mathieu_q(replace(NOMINAL, **{field: -1.0}))


def test_q_nominal_point_gives_bounded_motion():
    assert oracles.bounded_motion(mathieu_q(NOMINAL))


def test_radial_frequency_nominal_point():
    sec = secular_frequencies(NOMINAL)
    assert sec.stable
    assert sec.omega_radial / TWO_PI == pytest.approx(1.79e6, rel=5e-3)


@pytest.mark.parametrize("q", [0.1, 0.2, 0.3, 0.4])
def test_lowest_order_radial_within_5pct_of_floquet(q):
    v = q * CA40.mass * NOMINAL.r0**2 * NOMINAL.omega_rf**2 / (2 * CA40.charge)
    sec = secular_frequencies(TrapParams(v_rf=v))
    exact = oracles.floquet_beta(q) * NOMINAL.omega_rf / 2
    assert sec.omega_radial == pytest.approx(exact, rel=0.05)


def test_lowest_order_error_at_nominal_q():
    # The pseudopotential formula runs ~6% low at q = 0.51.
    sec = secular_frequencies(NOMINAL)
    exact = oracles.floquet_beta(sec.q) * NOMINAL.omega_rf / 2
    assert sec.omega_radial / exact - 1 == pytest.approx(-0.0565, abs=0.003)


def test_axial_200khz():
    assert axial_frequency(NOMINAL) / TWO_PI == pytest.approx(200e3, rel=2e-3)
    u = u_dc_for_axial(TWO_PI * 200e3, NOMINAL)
    assert u == pytest.approx(27.3, abs=0.1)


def test_axial_zero_dc():
    assert axial_frequency(TrapParams(u_dc=0.0)) == 0.0


def test_unstable_q_flagged():
    v = 1.2 * CA40.mass * NOMINAL.r0**2 * NOMINAL.omega_rf**2 / (2 * CA40.charge)
    sec = secular_frequencies(TrapParams(v_rf=v))
    assert sec.q == pytest.approx(1.2)
    assert not sec.stable and math.isnan(sec.omega_radial)
    assert oracles.floquet_beta(1.2) is None
    rep = stability_report(TrapParams(v_rf=v))
    assert rep["stable"] is False and rep["string_phase"] is False


def test_stability_limit_matches_floquet():
    assert oracles.floquet_beta(Q_STABILITY_LIMIT - 0.005) is not None
    assert oracles.floquet_beta(Q_STABILITY_LIMIT + 0.005) is None


def test_report_ratio_and_string_flag():
    rep = stability_report(NOMINAL)
    assert rep["ratio"] == pytest.approx(8.9, abs=0.1)
    assert rep["string_phase"] and rep["radial_exceeds_axial"]
    assert "a-parameter" in rep["approximation"]


def test_equal_frequencies_not_string():
    # Choose u_dc so that omega_axial == omega_radial.
    sec = secular_frequencies(NOMINAL)
    u = u_dc_for_axial(sec.omega_radial, NOMINAL)
    rep = stability_report(TrapParams(u_dc=u))
    assert rep["ratio"] == pytest.approx(1.0, rel=1e-12)
    assert rep["string_phase"] is False


@given(st.floats(1.0, 2000.0), st.floats(1e-27, 1e-24))
def test_q_scaling(v, m):
    sp = IonSpecies("x", m, CA40.charge)
    q = mathieu_q(TrapParams(v_rf=v), sp)
    assert mathieu_q(TrapParams(v_rf=2 * v), sp) == pytest.approx(2 * q, rel=1e-12)
    sp2 = IonSpecies("x", 2 * m, CA40.charge)
    assert q / mathieu_q(TrapParams(v_rf=v), sp2) == pytest.approx(2.0, rel=1e-12)


@given(st.floats(0.01, 500.0))
def test_axial_sqrt_scaling(u):
    w = axial_frequency(TrapParams(u_dc=u))
    assert axial_frequency(TrapParams(u_dc=4 * u)) == pytest.approx(2 * w, rel=1e-12)


@given(st.floats(1.0, 3000.0), st.floats(0.0, 1.0))
def test_stability_monotone_in_drive(v, frac):
    if secular_frequencies(TrapParams(v_rf=v)).stable:
        assert secular_frequencies(TrapParams(v_rf=v * frac)).stable
