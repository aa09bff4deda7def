"""Transmit-covariance optimization by Dinkelbach iterations.

The fractional objective (rate surrogate over consumed power) is handled by
the classic parametric scheme: repeatedly maximize ``f(Q) - eta*g(Q)`` and
update the balancing factor ``eta = f/g``.  The parametric subproblem needs
no semidefinite solver here: the surrogate rate depends on Q only through the
scalar ``s = tr(A Q A^H)``, and over a fixed power budget the largest
achievable ``s`` comes from putting all power on the top eigenvector of
``A^H A``.  That collapses each inner step to maximizing a concave scalar
function of the radiated power P on ``[0, p_max]``, solved by bisection on
its derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Scenario
from .metrics import gain_trace

_LN2 = np.log(2.0)

POWER_TOL = 1e-10
EIG_TOL = 1e-12
EIG_MAX_ITER = 200_000
DEFAULT_MAX_ITER = 100


@dataclass
class DinkelbachTrace:
    """Per-iteration balancing factors and parametric-subproblem residuals."""

    etas: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.residuals)


class ConvergenceError(RuntimeError):
    """Iteration cap exceeded; carries the trace collected so far."""

    def __init__(self, message: str, trace: DinkelbachTrace):
        super().__init__(message)
        self.trace = trace


def top_eigpair(mat: np.ndarray, tol: float = EIG_TOL, max_iter: int = EIG_MAX_ITER) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a unit eigenvector of a Hermitian PSD matrix.

    Plain power iteration from a fixed start vector, so repeated runs (and
    near-ties in the top eigenvalue) resolve to the same deterministic limit.
    Stops when the residual ||M v - lam v|| drops below tol * max(1, lam).
    """
    n = mat.shape[0]
    k = np.arange(n)
    v = (1.0 + 0.5 * np.cos(1.7 * k)) + 0.5j * np.sin(2.3 * k)
    v = v / np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = mat @ v
        norm_w = np.linalg.norm(w)
        if norm_w <= tol:
            return 0.0, v
        lam = float(np.real(np.vdot(v, w)))
        if np.linalg.norm(w - lam * v) <= tol * max(1.0, lam):
            return lam, v
        v = w / norm_w
    return lam, v


def _power_derivative(p: float, eta: float, coef: float, mus: np.ndarray) -> float:
    """Derivative of the reduced objective in the radiated power."""
    return float(np.sum(coef * mus / (1.0 + coef * p * mus)) / _LN2 - eta)


def reduced_objective(p: float, eta: float, lam_max: float, mus: np.ndarray, scenario: Scenario) -> float:
    """Value of f - eta*g on the rank-one family parameterized by radiated power p."""
    coef = scenario.path_gain_var / scenario.noise_power * lam_max
    rate = float(np.sum(np.log1p(coef * p * np.asarray(mus))) / _LN2)
    return rate - eta * (p + scenario.p_c)


def _best_power(eta: float, coef: float, mus: np.ndarray, p_max: float, p_tol: float) -> float:
    """Argmax of the concave reduced objective over [0, p_max] via derivative bisection."""
    if _power_derivative(p_max, eta, coef, mus) >= 0.0:
        return p_max
    if _power_derivative(0.0, eta, coef, mus) <= 0.0:
        return 0.0
    lo, hi = 0.0, p_max
    while hi - lo > p_tol:
        mid = (lo + hi) / 2.0
        if _power_derivative(mid, eta, coef, mus) > 0.0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def _inner_max_reduced(
    eta: float,
    lam_max: float,
    top_vec: np.ndarray,
    mus: np.ndarray,
    scenario: Scenario,
    p_tol: float = POWER_TOL,
) -> tuple[np.ndarray, float]:
    n = top_vec.shape[0]
    if eta < 0:
        raise ValueError("balancing factor must be nonnegative")
    if lam_max <= 0.0:
        q = np.zeros((n, n), dtype=complex)
        return q, -eta * scenario.p_c
    coef = scenario.path_gain_var / scenario.noise_power * lam_max
    p_star = _best_power(eta, coef, mus, scenario.p_max, p_tol)
    q = p_star * np.outer(top_vec, top_vec.conj())
    q = (q + q.conj().T) / 2.0
    return q, reduced_objective(p_star, eta, lam_max, mus, scenario)


def inner_max(
    eta: float,
    tx_a: np.ndarray,
    rx_b: np.ndarray,
    scenario: Scenario,
    p_tol: float = POWER_TOL,
) -> tuple[np.ndarray, float]:
    """Maximize f(Q) - eta*g(Q) over feasible covariances; returns (Q, value).

    The maximizer is rank one: all radiated power rides the dominant
    eigenvector of A^H A, with the power level chosen by a 1-D concave search.
    """
    lam_max, top_vec = top_eigpair(tx_a.conj().T @ tx_a)
    mus = np.clip(np.linalg.eigvalsh(rx_b.conj().T @ rx_b), 0.0, None)
    return _inner_max_reduced(eta, lam_max, top_vec, mus, scenario, p_tol)


def _surrogate_rate(s: float, mus: np.ndarray, scenario: Scenario) -> float:
    """log2 det(I + (var/noise) * s * B^H B) from the Gram eigenvalues."""
    beta = scenario.path_gain_var / scenario.noise_power * s
    return float(np.sum(np.log1p(beta * mus)) / _LN2)


def dinkelbach(
    tx_a: np.ndarray,
    rx_b: np.ndarray,
    scenario: Scenario,
    q_init: np.ndarray | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, float, DinkelbachTrace]:
    """Maximize surrogate-rate energy efficiency over the transmit covariance.

    Iterates eta = f(Q)/g(Q) against the parametric inner maximization until
    the residual f(Q+) - eta*g(Q+) falls within the scenario tolerance.
    Returns the final covariance, its energy efficiency, and the trace.
    Raises ConvergenceError (trace attached) if the cap is exceeded.
    """
    n = scenario.n_tx
    if q_init is None:
        q_init = scenario.p_max / n * np.eye(n, dtype=complex)
    lam_max, top_vec = top_eigpair(tx_a.conj().T @ tx_a)
    mus = np.clip(np.linalg.eigvalsh(rx_b.conj().T @ rx_b), 0.0, None)

    q = q_init
    f_val = _surrogate_rate(gain_trace(tx_a, q), mus, scenario)
    g_val = float(np.real(np.trace(q))) + scenario.p_c
    trace = DinkelbachTrace(etas=[f_val / g_val])

    for _ in range(max_iter):
        eta = trace.etas[-1]
        q, value = _inner_max_reduced(eta, lam_max, top_vec, mus, scenario)
        trace.residuals.append(value)
        f_val = _surrogate_rate(gain_trace(tx_a, q), mus, scenario)
        g_val = float(np.real(np.trace(q))) + scenario.p_c
        trace.etas.append(f_val / g_val)
        if abs(value) <= scenario.epsilon:
            return q, trace.etas[-1], trace
    raise ConvergenceError(
        f"no convergence within {max_iter} iterations (last residual {trace.residuals[-1]:.3e})",
        trace,
    )
