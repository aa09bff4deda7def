"""Geometric multipath channel with distance-aware phase terms.

Each side of the link sees a small set of scatterer paths.  The phase a path
picks up at an off-center element (or port) is derived from the propagation
path difference relative to the array center.  Besides the usual linear
``-offset*sin(elevation)`` term, the default model carries a second-order
term that shrinks with scatterer distance, so the wavefront curvature of
nearby scatterers is felt across the aperture.  The end-to-end channel is
``H = B^H O A`` with random per-path-pair gains ``O``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PortSelection, Scenario, port_offsets, tx_offsets

DEFAULT_DISTANCE_RANGE = (1.0, 10.0)


@dataclass(frozen=True)
class PathSet:
    """Per-path elevation/azimuth angles (rad) and scatterer distances (m)."""

    elevations: np.ndarray
    azimuths: np.ndarray
    distances: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "elevations", np.asarray(self.elevations, dtype=float))
        object.__setattr__(self, "azimuths", np.asarray(self.azimuths, dtype=float))
        object.__setattr__(self, "distances", np.asarray(self.distances, dtype=float))
        n = self.elevations.shape[0]
        if self.azimuths.shape != (n,) or self.distances.shape != (n,):
            raise ValueError("elevations, azimuths and distances must have equal length")
        if np.any(self.distances <= 0):
            raise ValueError("scatterer distances must be strictly positive")
        if np.any(np.abs(self.elevations) > np.pi / 2 + 1e-12):
            raise ValueError("elevations must lie in [-pi/2, pi/2]")

    @property
    def count(self) -> int:
        return int(self.elevations.shape[0])


def sample_paths(
    rng: np.random.Generator,
    count: int,
    distance_range: tuple[float, float] = DEFAULT_DISTANCE_RANGE,
) -> PathSet:
    """Draw `count` i.i.d. paths: uniform elevations, azimuths and distances.

    Elevations are uniform on [-pi/2, pi/2], azimuths on [0, 2*pi] and
    distances on `distance_range`.  The draw order (elevations, azimuths,
    distances) is fixed, so a given generator state yields the same PathSet.
    """
    lo, hi = float(distance_range[0]), float(distance_range[1])
    if lo <= 0 or hi < lo:
        raise ValueError(f"invalid distance range [{lo}, {hi}]")
    elevations = rng.uniform(-np.pi / 2, np.pi / 2, size=count)
    azimuths = rng.uniform(0.0, 2 * np.pi, size=count)
    distances = rng.uniform(lo, hi, size=count)
    return PathSet(elevations, azimuths, distances)


def path_delta_exact(offset, elevation, distance):
    """Exact propagation path difference between an offset position and the center.

    Law-of-cosines distance to the scatterer minus the center distance.
    Accepts scalars or broadcastable arrays.
    """
    c = np.asarray(offset, dtype=float)
    theta = np.asarray(elevation, dtype=float)
    ell = np.asarray(distance, dtype=float)
    reach = np.sqrt(ell**2 + c**2 - 2.0 * ell * c * np.sin(theta))
    return reach - ell


def path_delta_approx(offset, elevation, distance):
    """Default simplified path difference: linear term plus a 1/distance correction.

    The correction term ``-offset^2 sin^2(elevation) / (2 distance)`` vanishes
    as the scatterer recedes, recovering the plane-wave limit.
    """
    c = np.asarray(offset, dtype=float)
    s = np.sin(np.asarray(elevation, dtype=float))
    ell = np.asarray(distance, dtype=float)
    return -c * s - (c**2) * (s**2) / (2.0 * ell)


def path_delta_taylor(offset, elevation, distance):
    """Second-order Taylor expansion of `path_delta_exact` around offset=0.

    Kept for accuracy audits: its curvature term uses cos^2 rather than the
    sin^2 of `path_delta_approx`, so the two disagree at second order.
    """
    c = np.asarray(offset, dtype=float)
    theta = np.asarray(elevation, dtype=float)
    ell = np.asarray(distance, dtype=float)
    return -c * np.sin(theta) + (c**2) * (np.cos(theta) ** 2) / (2.0 * ell)


PHASE_MODELS = {
    "approx": path_delta_approx,
    "exact": path_delta_exact,
    "taylor": path_delta_taylor,
}


def _field_phases(offsets: np.ndarray, paths: PathSet, scenario: Scenario, model: str) -> np.ndarray:
    """Phase matrix (count x len(offsets)) of per-path unit responses."""
    try:
        delta = PHASE_MODELS[model]
    except KeyError:
        raise ValueError(f"unknown phase model {model!r}; expected one of {sorted(PHASE_MODELS)}")
    rho = delta(offsets[np.newaxis, :], paths.elevations[:, np.newaxis], paths.distances[:, np.newaxis])
    return 2.0 * np.pi / scenario.wavelength * rho


def tx_field_vector(n: int, paths: PathSet, scenario: Scenario, model: str = "approx") -> np.ndarray:
    """Unit-modulus response of transmit element ``n`` across all transmit paths."""
    offsets = tx_offsets(scenario)[n - 1 : n]
    return np.exp(1j * _field_phases(offsets, paths, scenario, model))[:, 0]


def tx_field_matrix(paths: PathSet, scenario: Scenario, model: str = "approx") -> np.ndarray:
    """Stacked transmit responses, shape (l_t_paths, n_tx); column n is element n."""
    return np.exp(1j * _field_phases(tx_offsets(scenario), paths, scenario, model))


def port_field_matrix(paths: PathSet, scenario: Scenario, model: str = "approx") -> np.ndarray:
    """Receive responses of every port, shape (l_r_paths, m_ports)."""
    return np.exp(1j * _field_phases(port_offsets(scenario), paths, scenario, model))


def rx_field_vector(port: int, paths: PathSet, scenario: Scenario, model: str = "approx") -> np.ndarray:
    """Unit-modulus response of a single port across all receive paths."""
    offsets = port_offsets(scenario)[port - 1 : port]
    return np.exp(1j * _field_phases(offsets, paths, scenario, model))[:, 0]


def rx_field_matrix(
    sel: PortSelection, paths: PathSet, scenario: Scenario, model: str = "approx"
) -> np.ndarray:
    """Receive responses of the activated ports, shape (l_r_paths, len(sel))."""
    cols = np.asarray(sel.indices, dtype=int) - 1
    return port_field_matrix(paths, scenario, model)[:, cols]


def sample_path_gains(rng: np.random.Generator, scenario: Scenario) -> np.ndarray:
    """Draw the (l_r_paths x l_t_paths) path-gain matrix.

    Entries are i.i.d. circularly-symmetric complex Gaussian with per-entry
    variance `scenario.path_gain_var` (real and imaginary parts each carry
    half of it).
    """
    shape = (scenario.l_r_paths, scenario.l_t_paths)
    scale = np.sqrt(scenario.path_gain_var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def assemble_channel(rx_b: np.ndarray, gains: np.ndarray, tx_a: np.ndarray) -> np.ndarray:
    """End-to-end channel ``B^H O A`` with shape (ports, elements)."""
    if rx_b.shape[0] != gains.shape[0] or gains.shape[1] != tx_a.shape[0]:
        raise ValueError(
            f"dimension mismatch: B is {rx_b.shape}, O is {gains.shape}, A is {tx_a.shape}"
        )
    return rx_b.conj().T @ gains @ tx_a
