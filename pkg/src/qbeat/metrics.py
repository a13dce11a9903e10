"""Scalar observables extracted from traces for sweeps and comparisons."""
from __future__ import annotations

import numpy as np


def first_beat_peak(times: np.ndarray, values: np.ndarray,
                    t_start: float = 0.0) -> tuple[float, float] | None:
    """Time and height of the first local maximum after t_start.

    A sample counts as a peak when it strictly exceeds both neighbours;
    returns None when the signal is monotonic over the searched range.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    idx = np.flatnonzero(t > t_start)
    if idx.size < 3:
        return None
    lo = max(int(idx[0]), 1)
    for i in range(lo, t.size - 1):
        if v[i] > v[i - 1] and v[i] > v[i + 1]:
            return float(t[i]), float(v[i])
    return None


def beat_visibility(times: np.ndarray, values: np.ndarray,
                    t_start: float, period: float) -> float:
    """(max - min)/(max + min) of a signal over one beat period after
    t_start.

    Beware that for a decaying signal the envelope drop enters on the same
    footing as the oscillation; use beat_modulation when the oscillatory
    part alone is wanted.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = (t >= t_start) & (t <= t_start + period)
    if not mask.any():
        raise ValueError("no samples inside the visibility window")
    hi = float(v[mask].max())
    lo = float(v[mask].min())
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


def beat_modulation(times: np.ndarray, values: np.ndarray, t_start: float,
                    period: float, n_periods: int = 2) -> float:
    """Depth of the oscillation at the given period, envelope removed.

    Least-squares fit of a line plus one harmonic at 1/period to log(v)
    over [t_start, t_start + n_periods * period]; returns the harmonic's
    amplitude.  Fitting the pieces jointly keeps the result independent of
    the oscillation phase at the window start.  A tone
    A e^{c t} (1 + m cos) with small m gives back m regardless of the
    decay rate c, so unlike beat_visibility this is blind to how fast the
    envelope falls.

    Values must be strictly positive inside the window.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = (t >= t_start) & (t <= t_start + n_periods * period)
    if mask.sum() < 8:
        raise ValueError("too few samples inside the modulation window")
    tw, vw = t[mask], v[mask]
    if vw.min() <= 0.0:
        raise ValueError("modulation window contains non-positive values")
    logv = np.log(vw)
    w = 2.0 * np.pi / period
    design = np.vstack([np.ones_like(tw), tw,
                        np.cos(w * tw), np.sin(w * tw)]).T
    coeffs, *_ = np.linalg.lstsq(design, logv, rcond=None)
    return float(np.hypot(coeffs[2], coeffs[3]))
