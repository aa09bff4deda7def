import math

import numpy as np
import pytest

from nffas.channel import (
    PathSet,
    assemble_channel,
    path_delta_approx,
    path_delta_exact,
    path_delta_taylor,
    port_field_matrix,
    rx_field_matrix,
    sample_path_gains,
    sample_paths,
    tx_field_matrix,
    tx_field_vector,
)
from nffas.geometry import PortSelection, Scenario, port_offsets

from conftest import random_unit_modulus


def test_sample_paths_reproducible():
    a = sample_paths(np.random.default_rng(42), 3)
    b = sample_paths(np.random.default_rng(42), 3)
    assert a.elevations.tobytes() == b.elevations.tobytes()
    assert a.azimuths.tobytes() == b.azimuths.tobytes()
    assert a.distances.tobytes() == b.distances.tobytes()


def test_sample_paths_count_and_ranges():
    paths = sample_paths(np.random.default_rng(0), 3)
    assert paths.count == 3
    assert np.all(np.abs(paths.elevations) <= np.pi / 2)
    assert np.all((paths.azimuths >= 0) & (paths.azimuths <= 2 * np.pi))
    assert np.all((paths.distances >= 1.0) & (paths.distances <= 10.0))


def test_sample_paths_elevation_mean():
    # law of large numbers: uniform on [-pi/2, pi/2] has mean 0, std pi/sqrt(12)
    n = 10**5
    paths = sample_paths(np.random.default_rng(7), n)
    se = (np.pi / np.sqrt(12.0)) / np.sqrt(n)
    assert abs(paths.elevations.mean()) < 3 * se


def test_sample_paths_invalid_range():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_paths(rng, 3, (0.0, 1.0))
    with pytest.raises(ValueError):
        sample_paths(rng, 3, (2.0, 1.0))


def test_path_delta_exact_zero_offset():
    assert path_delta_exact(0.0, 0.3, 1.0) == 0.0


def test_path_delta_exact_collinear():
    assert path_delta_exact(0.01, np.pi / 2, 1.0) == pytest.approx(-0.01, rel=1e-12)


def test_path_delta_exact_broadside():
    # law-of-cosines oracle: sqrt(l^2 + c^2) - l at zero elevation
    expected = math.sqrt(2.0**2 + 0.025**2) - 2.0
    assert expected == pytest.approx(0.0001562438969613389, rel=1e-12)
    assert path_delta_exact(0.025, 0.0, 2.0) == pytest.approx(expected, rel=1e-14)


def test_path_delta_approx_zero_elevation():
    assert path_delta_approx(0.37, 0.0, 1.0) == 0.0


def test_path_delta_approx_direct_value():
    assert path_delta_approx(0.01, np.pi / 6, 10.0) == pytest.approx(-0.00500125, rel=1e-12)


def test_path_delta_approx_converges_to_exact():
    # |approx - exact| relative to the linear term vanishes as offset/distance -> 0
    theta, ell = 0.7, 5.0
    offsets = 0.1 * 2.0 ** -np.arange(8)
    gaps = np.abs(path_delta_approx(offsets, theta, ell) - path_delta_exact(offsets, theta, ell))
    rel = gaps / np.abs(-offsets * np.sin(theta))
    assert np.all(np.diff(rel) < 0)
    assert rel[-1] < rel[0] / 100


def test_path_delta_taylor_matches_exact_to_second_order():
    # the taylor form is the true quadratic expansion; the default model is not
    theta, ell = 0.9, 3.0
    offsets = 0.05 * 2.0 ** -np.arange(10)
    gap_taylor = np.abs(path_delta_taylor(offsets, theta, ell) - path_delta_exact(offsets, theta, ell))
    gap_approx = np.abs(path_delta_approx(offsets, theta, ell) - path_delta_exact(offsets, theta, ell))
    # taylor residual is o(offset^2): ratio to offset^2 vanishes
    ratio = gap_taylor / offsets**2
    assert ratio[-1] < ratio[0] / 100
    # the default model keeps an O(offset^2) discrepancy with coefficient 1/(2l)
    coeff = gap_approx / offsets**2
    assert coeff[-1] == pytest.approx(1.0 / (2.0 * ell), rel=1e-3)


def test_tx_field_vector_single_path_zero_elevation():
    sc = Scenario(n_tx=4, l_t_paths=1)
    paths = PathSet([0.0], [1.0], [2.0])
    vec = tx_field_vector(2, paths, sc)
    assert vec.shape == (1,)
    assert vec[0] == pytest.approx(1.0 + 0.0j, abs=1e-15)


def test_field_matrices_unit_modulus(scenario):
    rng = np.random.default_rng(3)
    paths_t = sample_paths(rng, scenario.l_t_paths)
    paths_r = sample_paths(rng, scenario.l_r_paths)
    a = tx_field_matrix(paths_t, scenario)
    b = port_field_matrix(paths_r, scenario)
    assert np.max(np.abs(np.abs(a) - 1.0)) < 1e-12
    assert np.max(np.abs(np.abs(b) - 1.0)) < 1e-12


def test_tx_field_matrix_stacks_vectors(scenario):
    paths = sample_paths(np.random.default_rng(5), scenario.l_t_paths)
    a = tx_field_matrix(paths, scenario)
    for n in (1, 7, scenario.n_tx):
        assert np.allclose(a[:, n - 1], tx_field_vector(n, paths, scenario))


def test_rx_field_matrix_selects_columns(scenario):
    paths = sample_paths(np.random.default_rng(6), scenario.l_r_paths)
    full = port_field_matrix(paths, scenario)
    sel = PortSelection([2, 9, 17])
    b = rx_field_matrix(sel, paths, scenario)
    assert np.array_equal(b, full[:, [1, 8, 16]])
    swapped = rx_field_matrix(PortSelection([9, 17]), paths, scenario)
    assert np.array_equal(swapped, full[:, [8, 16]])


def test_rx_gram_diagonal_equals_path_count():
    sc = Scenario()
    paths = sample_paths(np.random.default_rng(8), sc.l_r_paths)
    b = rx_field_matrix(PortSelection([1, 5, 21]), paths, sc)
    gram = b.conj().T @ b
    assert np.allclose(np.diag(gram).real, sc.l_r_paths, atol=1e-12)


def test_rx_single_center_port_all_ones():
    sc = Scenario(m_ports=21, m_active=1)
    paths = sample_paths(np.random.default_rng(9), sc.l_r_paths)
    assert port_offsets(sc)[10] == 0.0
    b = rx_field_matrix(PortSelection([11]), paths, sc)
    assert np.allclose(b, 1.0, atol=1e-15)


def test_azimuths_do_not_enter_phases(scenario):
    rng = np.random.default_rng(10)
    paths = sample_paths(rng, scenario.l_t_paths)
    twisted = PathSet(paths.elevations, paths.azimuths + 1.234, paths.distances)
    assert np.array_equal(
        tx_field_matrix(paths, scenario), tx_field_matrix(twisted, scenario)
    )


def test_near_field_term_is_significant(scenario):
    # second-order phase exceeds 1e-3 rad somewhere across the aperture
    paths = sample_paths(np.random.default_rng(11), scenario.l_r_paths)
    c = port_offsets(scenario)[:, None]
    theta = paths.elevations[None, :]
    ell = paths.distances[None, :]
    second_order = 2 * np.pi / scenario.wavelength * c**2 * np.sin(theta) ** 2 / (2 * ell)
    assert np.max(np.abs(second_order)) > 1e-3


def test_sample_path_gains_reproducible(scenario):
    a = sample_path_gains(np.random.default_rng(1), scenario)
    b = sample_path_gains(np.random.default_rng(1), scenario)
    assert np.array_equal(a, b)
    assert a.shape == (scenario.l_r_paths, scenario.l_t_paths)


def test_sample_path_gains_moments():
    sc = Scenario(l_t_paths=1, l_r_paths=1, path_gain_var=0.7)
    rng = np.random.default_rng(2)
    draws = np.array([sample_path_gains(rng, sc)[0, 0] for _ in range(10**5)])
    power = np.abs(draws) ** 2
    se = power.std(ddof=1) / np.sqrt(power.size)
    assert abs(power.mean() - sc.path_gain_var) < 3 * se
    assert abs(draws.mean()) < 3 * np.sqrt(sc.path_gain_var / power.size)


def test_sample_path_gains_default_variance(scenario):
    # default per-entry variance is 1/(number of receive paths)
    assert scenario.path_gain_var == pytest.approx(1.0 / scenario.l_r_paths)


def test_assemble_channel_shapes_and_rank():
    sc = Scenario(n_tx=6, m_ports=8, m_active=4, l_t_paths=2, l_r_paths=3)
    rng = np.random.default_rng(12)
    a = random_unit_modulus(rng, (sc.l_t_paths, sc.n_tx))
    b = random_unit_modulus(rng, (sc.l_r_paths, sc.m_active))
    gains = sample_path_gains(rng, sc)
    h = assemble_channel(b, gains, a)
    assert h.shape == (sc.m_active, sc.n_tx)
    assert np.linalg.matrix_rank(h) <= min(sc.l_t_paths, sc.l_r_paths, sc.m_active, sc.n_tx)


def test_assemble_channel_rank_one_and_zero():
    rng = np.random.default_rng(13)
    a = random_unit_modulus(rng, (1, 5))
    b = random_unit_modulus(rng, (1, 3))
    h = assemble_channel(b, np.array([[2.0 - 1.0j]]), a)
    assert np.allclose(h, (2.0 - 1.0j) * np.outer(b.conj()[0], a[0]))
    assert np.allclose(assemble_channel(b, np.zeros((1, 1)), a), 0.0)


def test_assemble_channel_matches_triple_loop():
    # naive-summation oracle on a random small instance
    rng = np.random.default_rng(14)
    l_t, l_r, m0, n = 4, 4, 4, 4
    a = rng.standard_normal((l_t, n)) + 1j * rng.standard_normal((l_t, n))
    b = rng.standard_normal((l_r, m0)) + 1j * rng.standard_normal((l_r, m0))
    gains = rng.standard_normal((l_r, l_t)) + 1j * rng.standard_normal((l_r, l_t))
    expected = np.zeros((m0, n), dtype=complex)
    for m in range(m0):
        for col in range(n):
            acc = 0.0 + 0.0j
            for qq in range(l_r):
                for p in range(l_t):
                    acc += np.conj(b[qq, m]) * gains[qq, p] * a[p, col]
            expected[m, col] = acc
    h = assemble_channel(b, gains, a)
    err = np.linalg.norm(h - expected) / np.linalg.norm(expected)
    assert err < 1e-10


def test_assemble_channel_dimension_mismatch():
    with pytest.raises(ValueError):
        assemble_channel(np.ones((3, 2)), np.ones((2, 3)), np.ones((3, 4)))


def test_pathset_validation():
    with pytest.raises(ValueError):
        PathSet([0.1, 0.2], [0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        PathSet([0.1], [0.0], [-1.0])
    with pytest.raises(ValueError):
        PathSet([2.0], [0.0], [1.0])
