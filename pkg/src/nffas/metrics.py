"""Rate and energy-efficiency metrics.

The exact ergodic rate averages a log-det over random path gains; the cheap
surrogate moves the expectation inside the determinant, which collapses to a
closed form because the gain matrix has i.i.d. zero-mean entries.  All rates
are base-2 (bits per channel use); log-dets go through a Cholesky factor of
``I + PSD`` rather than a raw determinant.
"""

from __future__ import annotations

import numpy as np

from .channel import sample_path_gains
from .geometry import Scenario

_LN2 = np.log(2.0)

HERMITIAN_ATOL = 1e-10
PSD_EIG_FLOOR = -1e-9
TRACE_SLACK = 1e-9


class DegenerateTraceError(ValueError):
    """Raised when a check needs tr(A Q A^H) > 0 but it vanishes."""


def covariance_violation(q: np.ndarray, scenario: Scenario) -> str | None:
    """First violated covariance constraint (shape, Hermitian, PSD, trace), or None."""
    n = scenario.n_tx
    if q.shape != (n, n):
        return f"shape: expected ({n}, {n}), got {q.shape}"
    herm_gap = float(np.max(np.abs(q - q.conj().T), initial=0.0))
    if herm_gap > HERMITIAN_ATOL:
        return f"hermitian: asymmetry {herm_gap:.3e} exceeds {HERMITIAN_ATOL:.0e}"
    min_eig = float(np.min(np.linalg.eigvalsh((q + q.conj().T) / 2.0)))
    if min_eig < PSD_EIG_FLOOR:
        return f"psd: smallest eigenvalue {min_eig:.3e} below {PSD_EIG_FLOOR:.0e}"
    trace = float(np.real(np.trace(q)))
    if trace > scenario.p_max + TRACE_SLACK:
        return f"trace: {trace:.6e} exceeds budget {scenario.p_max:.6e}"
    return None


def validate_covariance(q: np.ndarray, scenario: Scenario) -> None:
    violation = covariance_violation(q, scenario)
    if violation is not None:
        raise ValueError(f"invalid transmit covariance: {violation}")


def _require_psd(q: np.ndarray) -> None:
    herm_gap = float(np.max(np.abs(q - q.conj().T), initial=0.0))
    if herm_gap > HERMITIAN_ATOL:
        raise ValueError(f"covariance not Hermitian (asymmetry {herm_gap:.3e})")
    min_eig = float(np.min(np.linalg.eigvalsh((q + q.conj().T) / 2.0)))
    if min_eig < PSD_EIG_FLOOR:
        raise ValueError(f"covariance not PSD (smallest eigenvalue {min_eig:.3e})")


def logdet2_eye_plus(mat: np.ndarray) -> np.ndarray | float:
    """log2 det(I + mat) for Hermitian PSD `mat`, batched over leading axes.

    Computed from the Cholesky diagonal of I + mat, never from a raw
    determinant.
    """
    mat = np.asarray(mat)
    herm = (mat + np.conj(np.swapaxes(mat, -1, -2))) / 2.0
    eye = np.eye(mat.shape[-1])
    chol = np.linalg.cholesky(eye + herm)
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    out = 2.0 * np.sum(np.log(diag), axis=-1) / _LN2
    return float(out) if out.ndim == 0 else out


def gain_trace(tx_a: np.ndarray, q: np.ndarray) -> float:
    """tr(A Q A^H); real for Hermitian Q."""
    return float(np.real(np.trace(tx_a @ q @ tx_a.conj().T)))


def rate_upper_bound(tx_a: np.ndarray, rx_b: np.ndarray, q: np.ndarray, scenario: Scenario) -> float:
    """Closed-form rate surrogate: log2 det(I + (var/noise) tr(AQA^H) B^H B)."""
    _require_psd(q)
    beta = scenario.path_gain_var / scenario.noise_power * gain_trace(tx_a, q)
    gram = rx_b.conj().T @ rx_b
    return float(logdet2_eye_plus(beta * gram))


def exact_rate_mc(
    tx_a: np.ndarray,
    rx_b: np.ndarray,
    q: np.ndarray,
    scenario: Scenario,
    rng: np.random.Generator,
    samples: int,
    gains: np.ndarray | None = None,
) -> tuple[float, float]:
    """Monte-Carlo ergodic rate and its standard error over fresh gain draws.

    `gains` pins the path-gain matrix to a point mass instead of sampling;
    that degenerate hook makes the estimator exact with zero standard error.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples for a standard error")
    _require_psd(q)
    l_r, l_t = scenario.l_r_paths, scenario.l_t_paths
    if gains is None:
        scale = np.sqrt(scenario.path_gain_var / 2.0)
        draws = scale * (
            rng.standard_normal((samples, l_r, l_t)) + 1j * rng.standard_normal((samples, l_r, l_t))
        )
    else:
        draws = np.broadcast_to(np.asarray(gains), (samples, l_r, l_t))
    h = rx_b.conj().T[np.newaxis] @ draws @ tx_a[np.newaxis]
    inner = h @ q[np.newaxis] @ np.conj(np.swapaxes(h, -1, -2)) / scenario.noise_power
    rates = np.atleast_1d(logdet2_eye_plus(inner))
    estimate = float(np.mean(rates))
    std_error = float(np.std(rates, ddof=1) / np.sqrt(samples))
    return estimate, std_error


def expectation_identity_check(
    tx_a: np.ndarray,
    q: np.ndarray,
    scenario: Scenario,
    rng: np.random.Generator,
    samples: int,
) -> float:
    """Relative Frobenius gap between the sampled mean of O A Q A^H O^H and its closed form.

    The closed form is tr(A Q A^H) * var * I; the gap decays like
    1/sqrt(samples).
    """
    if samples < 10:
        raise ValueError("need at least 10 samples")
    target_scale = gain_trace(tx_a, q) * scenario.path_gain_var
    if target_scale <= 0.0:
        raise DegenerateTraceError("tr(A Q A^H) vanishes; identity check is degenerate")
    l_r = scenario.l_r_paths
    mid = tx_a @ q @ tx_a.conj().T
    draws = np.stack([sample_path_gains(rng, scenario) for _ in range(samples)])
    terms = draws @ mid[np.newaxis] @ np.conj(np.swapaxes(draws, -1, -2))
    mean = terms.mean(axis=0)
    target = target_scale * np.eye(l_r)
    return float(np.linalg.norm(mean - target) / np.linalg.norm(target))


def energy_efficiency(rate: float, q: np.ndarray, scenario: Scenario) -> float:
    """Rate divided by total consumed power tr(Q) + static draw."""
    trace = float(np.real(np.trace(q)))
    if trace < 0:
        raise ValueError(f"negative transmit power tr(Q) = {trace:.3e}")
    return rate / (trace + scenario.p_c)
