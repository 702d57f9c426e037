"""Exponential fits of decaying diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from oqt_sim.errors import InsufficientDataError

PEAK_FLOOR = 1e-8
LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit log y = intercept - rate * t."""

    rate: float
    intercept: float
    n_points: int
    max_log_residual: float


def _log_linear_fit(t: np.ndarray, y: np.ndarray) -> DecayFit:
    if t.size < 2:
        raise InsufficientDataError(f"need at least 2 points for a decay fit, got {t.size}")
    log_y = np.log(y)
    slope, intercept = np.polyfit(t, log_y, 1)
    residual = log_y - (intercept + slope * t)
    return DecayFit(
        rate=float(-slope),
        intercept=float(intercept),
        n_points=int(t.size),
        max_log_residual=float(np.max(np.abs(residual))),
    )


def trace_distance_decay_fit(
    times: np.ndarray, distance: np.ndarray, t_max: Optional[float] = None
) -> DecayFit:
    """Slope of log D(t); for OQT-only dynamics the rate is 2 * alpha_eff."""
    times = np.asarray(times, dtype=np.float64)
    distance = np.asarray(distance, dtype=np.float64)
    keep = distance > LOG_FLOOR
    if t_max is not None:
        keep &= times <= t_max
    return _log_linear_fit(times[keep], distance[keep])


def envelope_decay_rate(times: np.ndarray, signal: np.ndarray) -> DecayFit:
    """Decay rate of the envelope of an oscillating signal.

    Fits the log of the local maxima of |signal|. Maxima below 1e-8 of the
    largest are dropped since they sit in integration noise.
    """
    times = np.asarray(times, dtype=np.float64)
    magnitude = np.abs(np.asarray(signal, dtype=np.float64))
    peaks, _ = find_peaks(magnitude)
    if peaks.size == 0:
        raise InsufficientDataError("signal has no local maxima to fit an envelope")

    heights = magnitude[peaks]
    keep = heights >= PEAK_FLOOR * heights.max()
    return _log_linear_fit(times[peaks][keep], heights[keep])


def shared_rate_fit(
    times: np.ndarray, means: np.ndarray, initial: Sequence[float]
) -> float:
    """One relaxation rate shared by several components.

    Each column j of ``means`` is modelled as
    z_inf_j + (initial_j - z_inf_j) * exp(-rate * t).
    """
    times = np.asarray(times, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    initial = np.asarray(initial, dtype=np.float64)
    n, m = means.shape
    if n < 3:
        raise InsufficientDataError(f"need at least 3 time samples, got {n}")

    xdata = np.tile(times, m)
    component = np.repeat(np.arange(m), n)
    ydata = means.T.reshape(-1)

    def model(t, rate, *asymptotes):
        z_inf = np.asarray(asymptotes)[component]
        return z_inf + (initial[component] - z_inf) * np.exp(-rate * t)

    span = float(times[-1] - times[0]) or 1.0
    p0 = [3.0 / span] + list(means[-1])
    lower = [0.0] + [-np.inf] * m
    upper = [np.inf] * (m + 1)
    params, _ = curve_fit(model, xdata, ydata, p0=p0, bounds=(lower, upper), maxfev=20000)
    return float(params[0])
