import numpy as np
import pytest

from nffas.geometry import (
    PortSelection,
    Scenario,
    p_max_from_snr,
    port_offset,
    port_offsets,
    selection_violation,
    tx_offset,
    tx_offsets,
    validate_selection,
)


def test_tx_offset_first_element():
    sc = Scenario(n_tx=20, wavelength=5e-3)
    assert tx_offset(1, sc) == pytest.approx(-0.02375, abs=1e-15)


def test_tx_offset_center_element_odd_count():
    sc = Scenario(n_tx=21)
    assert tx_offset(11, sc) == 0.0


def test_tx_offset_mirror_symmetry():
    sc = Scenario(n_tx=20)
    for n in range(1, sc.n_tx + 1):
        assert tx_offset(n, sc) == pytest.approx(-tx_offset(sc.n_tx + 1 - n, sc), abs=1e-18)


def test_port_offset_center_and_first():
    sc = Scenario(m_ports=21, wavelength=5e-3)
    assert port_offset(11, sc) == 0.0
    assert port_offset(1, sc) == pytest.approx(-0.025, abs=1e-15)


def test_port_aperture_span():
    sc = Scenario(m_ports=21, wavelength=5e-3)
    span = port_offset(sc.m_ports, sc) - port_offset(1, sc)
    assert span == pytest.approx((sc.m_ports - 1) * sc.d_u, rel=1e-15)


def test_offsets_sum_to_zero():
    for n in (1, 2, 5, 20, 21):
        sc = Scenario(n_tx=n)
        assert abs(tx_offsets(sc).sum()) < 1e-15


def test_offsets_uniform_spacing():
    sc = Scenario(n_tx=17, m_ports=9)
    assert np.allclose(np.diff(tx_offsets(sc)), sc.d_bs, rtol=1e-12)
    assert np.allclose(np.diff(port_offsets(sc)), sc.d_u, rtol=1e-12)


def test_offset_index_out_of_range():
    sc = Scenario()
    with pytest.raises(ValueError):
        tx_offset(0, sc)
    with pytest.raises(ValueError):
        tx_offset(sc.n_tx + 1, sc)
    with pytest.raises(ValueError):
        port_offset(0, sc)
    with pytest.raises(ValueError):
        port_offset(sc.m_ports + 1, sc)


def test_validate_selection_ok():
    sc = Scenario(m_ports=21, m_active=3)
    validate_selection(PortSelection([3, 7, 12]), sc)


def test_validate_selection_ordering_violation():
    sc = Scenario(m_ports=21, m_active=3)
    violation = selection_violation(PortSelection([7, 3, 12]), sc)
    assert violation is not None and violation.startswith("ordering")
    with pytest.raises(ValueError, match="ordering"):
        validate_selection(PortSelection([7, 3, 12]), sc)


def test_validate_selection_range_violation():
    sc = Scenario(m_ports=21, m_active=2)
    violation = selection_violation(PortSelection([0, 3]), sc)
    assert violation is not None and violation.startswith("range")


def test_validate_selection_cardinality_violation():
    sc = Scenario(m_ports=21, m_active=3)
    violation = selection_violation(PortSelection([3, 7]), sc)
    assert violation is not None and violation.startswith("cardinality")


def test_scenario_defaults_are_half_wavelength():
    sc = Scenario(wavelength=5e-3)
    assert sc.d_bs == sc.d_u == 2.5e-3


def test_scenario_default_power_budget():
    sc = Scenario()
    assert sc.p_max == pytest.approx(p_max_from_snr(15.0, sc.noise_power), rel=1e-15)
    assert sc.snr_db == pytest.approx(15.0, abs=1e-12)


def test_scenario_invariants_rejected():
    with pytest.raises(ValueError):
        Scenario(n_tx=0)
    with pytest.raises(ValueError):
        Scenario(m_ports=2, m_active=3)
    with pytest.raises(ValueError):
        Scenario(noise_power=0.0)
    with pytest.raises(ValueError):
        Scenario(epsilon=-1.0)
