"""Array geometry: element/port coordinates on the two linear apertures.

Both the transmit array and the fluid-antenna port line are uniform linear
layouts centered on their own origin, so every coordinate reduces to a signed
offset along the array axis.  Indices are 1-based throughout the public API.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SNR_DB = 15.0


def p_max_from_snr(snr_db: float, noise_power: float) -> float:
    """Transmit power budget in watts for a given SNR (dB) over the noise power."""
    return noise_power * 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class Scenario:
    """Physical and algorithmic constants for one simulated link.

    All lengths are meters, all powers are watts.  ``d_bs``/``d_u`` default to
    half a wavelength and ``p_max`` defaults to the budget implied by a 15 dB
    SNR over ``noise_power``.
    """

    n_tx: int = 20
    m_ports: int = 21
    m_active: int = 3
    wavelength: float = 5e-3
    d_bs: float = None  # type: ignore[assignment]  # resolved to wavelength/2
    d_u: float = None  # type: ignore[assignment]
    noise_power: float = 0.01
    path_gain_var: float = 1.0 / 3.0
    p_max: float = None  # type: ignore[assignment]  # resolved from DEFAULT_SNR_DB
    p_c: float = 0.1
    epsilon: float = 1e-6
    l_t_paths: int = 3
    l_r_paths: int = 3

    def __post_init__(self) -> None:
        if self.d_bs is None:
            object.__setattr__(self, "d_bs", self.wavelength / 2.0)
        if self.d_u is None:
            object.__setattr__(self, "d_u", self.wavelength / 2.0)
        if self.p_max is None:
            object.__setattr__(self, "p_max", p_max_from_snr(DEFAULT_SNR_DB, self.noise_power))
        if self.n_tx < 1:
            raise ValueError(f"n_tx must be >= 1, got {self.n_tx}")
        if not (self.m_ports >= self.m_active >= 1):
            raise ValueError(
                f"need m_ports >= m_active >= 1, got m_ports={self.m_ports}, m_active={self.m_active}"
            )
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        for name in ("d_bs", "d_u", "noise_power", "path_gain_var", "p_max", "p_c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.l_t_paths < 1 or self.l_r_paths < 1:
            raise ValueError("path counts must be >= 1")

    @property
    def snr_db(self) -> float:
        """Configured power budget expressed as an SNR in dB."""
        return 10.0 * np.log10(self.p_max / self.noise_power)


@dataclass(frozen=True)
class PortSelection:
    """Activated port indices on the fluid antenna, 1-based and strictly increasing."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


def _centered_offset(index, count: int, spacing: float):
    """Signed offset of a 1-based index on a centered uniform line of `count` points."""
    k = (2.0 * (np.asarray(index) - 1.0) - count + 1.0) / 2.0
    return k * spacing


def tx_offset(n: int, scenario: Scenario) -> float:
    """Signed axis coordinate (m) of transmit element ``n``."""
    if not 1 <= n <= scenario.n_tx:
        raise ValueError(f"transmit index {n} out of range [1, {scenario.n_tx}]")
    return float(_centered_offset(n, scenario.n_tx, scenario.d_bs))


def port_offset(r_m: int, scenario: Scenario) -> float:
    """Signed axis coordinate (m) of fluid-antenna port ``r_m``."""
    if not 1 <= r_m <= scenario.m_ports:
        raise ValueError(f"port index {r_m} out of range [1, {scenario.m_ports}]")
    return float(_centered_offset(r_m, scenario.m_ports, scenario.d_u))


def tx_offsets(scenario: Scenario) -> np.ndarray:
    """Offsets of all transmit elements, shape (n_tx,)."""
    return _centered_offset(np.arange(1, scenario.n_tx + 1), scenario.n_tx, scenario.d_bs)


def port_offsets(scenario: Scenario) -> np.ndarray:
    """Offsets of all ports, shape (m_ports,)."""
    return _centered_offset(np.arange(1, scenario.m_ports + 1), scenario.m_ports, scenario.d_u)


def selection_violation(sel: PortSelection, scenario: Scenario) -> str | None:
    """First violated selection constraint (range, ordering, cardinality), or None."""
    for i in sel.indices:
        if not 1 <= i <= scenario.m_ports:
            return f"range: index {i} outside [1, {scenario.m_ports}]"
    for a, b in zip(sel.indices, sel.indices[1:]):
        if a >= b:
            return f"ordering: indices must be strictly increasing, got {a} before {b}"
    if len(sel.indices) != scenario.m_active:
        return f"cardinality: expected {scenario.m_active} indices, got {len(sel.indices)}"
    return None


def validate_selection(sel: PortSelection, scenario: Scenario) -> None:
    """Raise ValueError describing the first violated constraint, if any."""
    violation = selection_violation(sel, scenario)
    if violation is not None:
        raise ValueError(f"invalid port selection: {violation}")
