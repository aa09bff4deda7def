"""Activated-port optimization at a fixed transmit covariance.

Swapping a single activated port changes the receive Gram matrix by a
rank-one term, so its contribution to the log-det rate splits off in closed
form: candidate port j scores ``p(j) = b(j)^H (I + beta * Bbar Bbar^H)^-1
b(j)`` against the other activated columns ``Bbar``.  One sweep improves
each slot in turn inside the window left open by its neighbours, which keeps
the strict ordering feasible by construction.  An exhaustive search over all
index combinations serves as the small-instance oracle, and a uniform random
selection is the cheap baseline.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .channel import PathSet, port_field_matrix, rx_field_matrix, rx_field_vector, tx_field_matrix
from .geometry import PortSelection, Scenario, validate_selection
from .metrics import gain_trace, logdet2_eye_plus

COMBINATION_CAP = 10**6


class CombinationCapError(ValueError):
    """Exhaustive search refused: the combination count exceeds the cap."""

    def __init__(self, count: int, cap: int):
        super().__init__(f"{count} port combinations exceed the cap of {cap}")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class PortGainContext:
    """Fixed parts of the per-port score for one slot update.

    `deflated_matrix` holds the receive columns of the other activated ports
    and `inverse_core` is (I + beta * Bbar Bbar^H)^-1.
    """

    beta: float
    deflated_matrix: np.ndarray
    inverse_core: np.ndarray


def beta_factor(tx_a: np.ndarray, q: np.ndarray, scenario: Scenario) -> float:
    """Scalar channel-strength factor (var/noise) * tr(A Q A^H)."""
    return scenario.path_gain_var / scenario.noise_power * gain_trace(tx_a, q)


def make_gain_context(beta: float, deflated_cols: np.ndarray) -> PortGainContext:
    """Build the context from the deflated column block (l_r_paths x (m0-1))."""
    l_r = deflated_cols.shape[0]
    core = np.eye(l_r) + beta * (deflated_cols @ deflated_cols.conj().T)
    return PortGainContext(beta=beta, deflated_matrix=deflated_cols, inverse_core=np.linalg.inv(core))


def port_gain(candidate: int, ctx: PortGainContext, paths: PathSet, scenario: Scenario, model: str = "approx") -> float:
    """Score of putting the open slot on `candidate`; real and nonnegative."""
    b = rx_field_vector(candidate, paths, scenario, model)
    return float(np.real(b.conj() @ ctx.inverse_core @ b))


def coordinate_update(
    m: int,
    sel: PortSelection,
    beta: float,
    paths: PathSet,
    scenario: Scenario,
    model: str = "approx",
) -> PortSelection:
    """Re-place slot `m` (1-based) at the best-scoring index between its neighbours.

    Candidates are scanned in ascending order and ties keep the smallest
    index.  The current index is always a candidate, so the surrogate rate
    never decreases.
    """
    validate_selection(sel, scenario)
    indices = list(sel.indices)
    lo = indices[m - 2] if m >= 2 else 0
    hi = indices[m] if m <= len(indices) - 1 else scenario.m_ports + 1
    candidates = np.arange(lo + 1, hi)
    if candidates.size == 1:
        return sel
    ports = port_field_matrix(paths, scenario, model)
    others = [idx - 1 for slot, idx in enumerate(indices) if slot != m - 1]
    ctx = make_gain_context(beta, ports[:, others])
    cand_cols = ports[:, candidates - 1]
    scores = np.real(np.einsum("ij,ik,kj->j", cand_cols.conj(), ctx.inverse_core, cand_cols))
    indices[m - 1] = int(candidates[int(np.argmax(scores))])
    return PortSelection(indices)


def sweep_ports(
    sel: PortSelection,
    q: np.ndarray,
    tx_paths: PathSet,
    rx_paths: PathSet,
    scenario: Scenario,
    model: str = "approx",
) -> PortSelection:
    """One in-order pass of coordinate updates over all slots at fixed Q."""
    beta = beta_factor(tx_field_matrix(tx_paths, scenario, model), q, scenario)
    for m in range(1, len(sel.indices) + 1):
        sel = coordinate_update(m, sel, beta, rx_paths, scenario, model)
    return sel


def sweep_to_fixed_point(
    sel: PortSelection,
    q: np.ndarray,
    tx_paths: PathSet,
    rx_paths: PathSet,
    scenario: Scenario,
    model: str = "approx",
    max_sweeps: int = 100,
) -> PortSelection:
    """Repeat sweeps until the selection stops changing."""
    for _ in range(max_sweeps):
        updated = sweep_ports(sel, q, tx_paths, rx_paths, scenario, model)
        if updated.indices == sel.indices:
            return sel
        sel = updated
    return sel


def exhaustive_search(
    q: np.ndarray,
    tx_paths: PathSet,
    rx_paths: PathSet,
    scenario: Scenario,
    cap: int = COMBINATION_CAP,
    model: str = "approx",
) -> tuple[PortSelection, float]:
    """Best selection over every strictly increasing index combination.

    Evaluates the surrogate rate for all C(m_ports, m_active) subsets;
    refuses with a CombinationCapError when that count exceeds `cap`.  Ties
    resolve to the lexicographically smallest combination.
    """
    count = comb(scenario.m_ports, scenario.m_active)
    if count > cap:
        raise CombinationCapError(count, cap)
    beta = beta_factor(tx_field_matrix(tx_paths, scenario, model), q, scenario)
    ports = port_field_matrix(rx_paths, scenario, model)
    combos = np.fromiter(
        itertools.chain.from_iterable(
            itertools.combinations(range(scenario.m_ports), scenario.m_active)
        ),
        dtype=int,
    ).reshape(count, scenario.m_active)
    best_idx, best_rate = 0, -np.inf
    chunk = 65536
    for start in range(0, count, chunk):
        block = combos[start : start + chunk]
        cols = ports[:, block].transpose(1, 0, 2)  # (block, l_r, m0)
        grams = np.conj(np.swapaxes(cols, 1, 2)) @ cols
        rates = np.atleast_1d(logdet2_eye_plus(beta * grams))
        local = int(np.argmax(rates))
        if rates[local] > best_rate:
            best_idx, best_rate = start + local, float(rates[local])
    return PortSelection(combos[best_idx] + 1), best_rate


def random_selection(rng: np.random.Generator, scenario: Scenario) -> PortSelection:
    """Uniformly random strictly-increasing selection of m_active ports."""
    picks = rng.choice(scenario.m_ports, size=scenario.m_active, replace=False)
    return PortSelection(sorted(int(i) + 1 for i in picks))


def selection_rate(
    sel: PortSelection,
    q: np.ndarray,
    tx_paths: PathSet,
    rx_paths: PathSet,
    scenario: Scenario,
    model: str = "approx",
) -> float:
    """Surrogate rate of one selection (direct log-det, no lemma split)."""
    beta = beta_factor(tx_field_matrix(tx_paths, scenario, model), q, scenario)
    rx_b = rx_field_matrix(sel, rx_paths, scenario, model)
    return float(logdet2_eye_plus(beta * (rx_b.conj().T @ rx_b)))
