"""Least-squares power-law fits in log-log coordinates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_POINTS = 6


@dataclass(frozen=True)
class DecayFit:
    times: np.ndarray
    values: np.ndarray
    slope: float
    log_intercept: float
    residual: float

    @property
    def intercept(self) -> float:
        """The constant C in value ~ C t^slope."""
        return float(np.exp(self.log_intercept))

    def predict(self, t):
        return self.intercept * np.asarray(t, dtype=float) ** self.slope


def decay_fit(times, values, min_points: int = MIN_POINTS) -> DecayFit:
    """Fit log(value) = log C + slope log t; residual is the RMS log misfit."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape:
        raise ValueError("times and values differ in shape")
    if len(t) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(t)}")
    if np.any(v <= 0) or np.any(t <= 0):
        raise ValueError("decay fits need strictly positive times and values")
    lt, lv = np.log(t), np.log(v)
    slope, icpt = np.polyfit(lt, lv, 1)
    resid = lv - (slope * lt + icpt)
    return DecayFit(t, v, float(slope), float(icpt), float(np.sqrt(np.mean(resid**2))))


def log2_slope(js, values) -> float:
    """Slope of log2(value) against the shell index j."""
    js = np.asarray(js, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(js) < 2:
        raise ValueError("need at least two shells for a slope")
    return float(np.polyfit(js, np.log2(v), 1)[0])
