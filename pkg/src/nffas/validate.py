"""Self-contained correctness suites for the `validate` CLI subcommand.

Each suite cross-checks an optimizer path against an independent route:
determinant identities against direct log-dets, the cheap rate bound against
Monte-Carlo sampling, the fractional-programming solver against a dense grid
scan, and the coordinate port sweeps against exhaustive enumeration.  These
are reduced-size versions of the full test suite, sized to run in seconds.
"""

from __future__ import annotations

import itertools

import numpy as np

from .channel import rx_field_matrix, sample_paths, tx_field_matrix
from .geometry import PortSelection, Scenario
from .metrics import exact_rate_mc, logdet2_eye_plus, rate_upper_bound
from .portopt import (
    exhaustive_search,
    make_gain_context,
    random_selection,
    selection_rate,
    sweep_to_fixed_point,
)
from .txopt import dinkelbach

_LN2 = np.log(2.0)


def _random_unit_modulus(rng: np.random.Generator, shape) -> np.ndarray:
    return np.exp(2j * np.pi * rng.uniform(size=shape))


def _random_feasible_q(rng: np.random.Generator, scenario: Scenario) -> np.ndarray:
    n = scenario.n_tx
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q = x @ x.conj().T
    target = rng.uniform(0.2, 1.0) * scenario.p_max
    return q * (target / np.real(np.trace(q)))


def suite_det_identities(count: int = 200, seed: int = 7) -> tuple[bool, str]:
    """Gram-side/path-side determinant swap and the rank-one split, via direct log-dets."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        l_r, m0 = 3, int(rng.integers(1, 5))
        beta = float(rng.uniform(0.01, 50.0))
        b = _random_unit_modulus(rng, (l_r, m0))
        lhs = logdet2_eye_plus(beta * (b.conj().T @ b))
        rhs = logdet2_eye_plus(beta * (b @ b.conj().T))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-30))
        bbar, col = b[:, :-1], b[:, -1]
        ctx = make_gain_context(beta, bbar)
        gain = float(np.real(col.conj() @ ctx.inverse_core @ col))
        split = float(np.log1p(beta * gain) / _LN2) + logdet2_eye_plus(
            beta * (bbar @ bbar.conj().T)
        )
        worst = max(worst, abs(lhs - split) / max(abs(lhs), 1e-30))
    ok = worst <= 1e-9
    return ok, f"worst relative gap {worst:.2e} over {count} instances (tol 1e-9)"


def suite_jensen(scenarios: int = 20, samples: int = 500, seed: int = 11) -> tuple[bool, str]:
    """Monte-Carlo rate must not exceed the closed-form bound beyond sampling noise."""
    rng = np.random.default_rng(seed)
    scenario = Scenario()
    hits = 0
    for _ in range(scenarios):
        paths_t = sample_paths(rng, scenario.l_t_paths)
        paths_r = sample_paths(rng, scenario.l_r_paths)
        sel = random_selection(rng, scenario)
        q = _random_feasible_q(rng, scenario)
        tx_a = tx_field_matrix(paths_t, scenario)
        rx_b = rx_field_matrix(sel, paths_r, scenario)
        bound = rate_upper_bound(tx_a, rx_b, q, scenario)
        estimate, std_error = exact_rate_mc(tx_a, rx_b, q, scenario, rng, samples)
        if estimate <= bound + 3.0 * std_error:
            hits += 1
    ok = hits >= scenarios - 1
    return ok, f"bound respected in {hits}/{scenarios} scenarios"


def suite_dinkelbach_grid(instances: int = 10, grid_points: int = 100_000, seed: int = 13) -> tuple[bool, str]:
    """Fractional-programming solver vs a dense scan of the reduced power problem."""
    rng = np.random.default_rng(seed)
    scenario = Scenario()
    worst = 0.0
    for _ in range(instances):
        paths_t = sample_paths(rng, scenario.l_t_paths)
        paths_r = sample_paths(rng, scenario.l_r_paths)
        sel = random_selection(rng, scenario)
        tx_a = tx_field_matrix(paths_t, scenario)
        rx_b = rx_field_matrix(sel, paths_r, scenario)
        _, eta, _ = dinkelbach(tx_a, rx_b, scenario)
        lam = float(np.linalg.eigvalsh(tx_a.conj().T @ tx_a)[-1])
        mus = np.clip(np.linalg.eigvalsh(rx_b.conj().T @ rx_b), 0.0, None)
        p = np.linspace(0.0, scenario.p_max, grid_points)
        coef = scenario.path_gain_var / scenario.noise_power * lam
        rates = np.sum(np.log1p(coef * p[:, None] * mus[None, :]), axis=1) / _LN2
        eta_grid = float(np.max(rates / (p + scenario.p_c)))
        worst = max(worst, abs(eta - eta_grid) / eta_grid)
    ok = worst <= 1e-5
    return ok, f"worst relative gap to grid {worst:.2e} over {instances} instances (tol 1e-5)"


def suite_coordinate_exhaustive(seeds: int = 20, seed: int = 17) -> tuple[bool, str]:
    """Multi-start coordinate sweeps must recover the exhaustive optimum on small instances."""
    rng = np.random.default_rng(seed)
    scenario = Scenario(m_ports=8, m_active=2)
    failures = 0
    for _ in range(seeds):
        paths_t = sample_paths(rng, scenario.l_t_paths)
        paths_r = sample_paths(rng, scenario.l_r_paths)
        q = _random_feasible_q(rng, scenario)
        _, best_rate = exhaustive_search(q, paths_t, paths_r, scenario)
        reached = -np.inf
        for combo in itertools.combinations(range(1, scenario.m_ports + 1), scenario.m_active):
            sel = sweep_to_fixed_point(PortSelection(combo), q, paths_t, paths_r, scenario)
            reached = max(reached, selection_rate(sel, q, paths_t, paths_r, scenario))
        if abs(reached - best_rate) > 1e-9 * max(abs(best_rate), 1.0):
            failures += 1
    ok = failures == 0
    return ok, f"{seeds - failures}/{seeds} seeds recovered the exhaustive optimum"


SUITES = {
    "det-identities": suite_det_identities,
    "jensen": suite_jensen,
    "dinkelbach-grid": suite_dinkelbach_grid,
    "coordinate-exhaustive": suite_coordinate_exhaustive,
}


def run_suites(names: list[str] | None = None) -> list[tuple[str, bool, str]]:
    picked = names or list(SUITES)
    results = []
    for name in picked:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
        ok, detail = SUITES[name]()
        results.append((name, ok, detail))
    return results
