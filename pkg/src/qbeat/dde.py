"""Time-domain oracle: direct integration of the retarded amplitude equations.

The four interaction-picture amplitudes obey

    d/dt c_{m,j}(t) = - sum_{l} (G_jl/2) e^{i w_jl t}
                        [ c_{m,l}(t) + e^{i phi_l} c_{m',l}(t - d/v) Theta(t - d/v) ]

with m' the other atom and phi_l the propagation phase of the l->1
transition.  Classical RK4 with the step locked to the delay (d/v an exact
integer number of steps) integrates this by the method of steps; half-step
history reads use cubic Hermite interpolation from stored values and
derivatives.  The solution has a derivative kink exactly at t = d/v, which
therefore always falls on a panel boundary.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import AmplitudeTrace, commensurate_step
from .errors import NonDistinctSteps, NormViolation, StepTooCoarse
from .params import InitialState, SystemParams

#: the fastest retained rotation must be resolved: |omega23| * h <= this
PHASE_RESOLUTION_LIMIT = 0.05

#: hard bound checked during integration (loose; catches blowups)
NORM_RUNAWAY_TOL = 1e-4

_HISTORY_MODES = ("cubic", "exact_grid")


@dataclass(frozen=True)
class DdeConfig:
    """Integration request: step is adjusted so the delay is an exact
    integer multiple (delays shorter than step/100 are treated as zero,
    keeping the propagation phases)."""

    step: float = 5e-4
    t_max: float = 8.0
    history_interp: str = "cubic"

    def __post_init__(self):
        if self.step <= 0 or self.t_max <= 0:
            raise ValueError("step and t_max must be positive")
        if self.history_interp not in _HISTORY_MODES:
            raise ValueError(f"history_interp must be one of {_HISTORY_MODES}")

    def resolve(self, params: SystemParams) -> tuple[float, int, int]:
        """(adjusted step, number of steps, delay in steps)."""
        h, m = commensurate_step(params.delay, self.step)
        if abs(params.omega23) * h > PHASE_RESOLUTION_LIMIT:
            raise StepTooCoarse(
                f"step {h:.3e} cannot resolve the beat phase: "
                f"|omega23|*h = {abs(params.omega23) * h:.3f} > {PHASE_RESOLUTION_LIMIT}")
        n = max(1, round(self.t_max / h))
        return h, n, m


def _make_rhs(params: SystemParams):
    g22h = 0.5 * params.gamma22
    g33h = 0.5 * params.gamma33
    g23h = 0.5 * params.gamma23
    g32h = 0.5 * params.gamma32
    w23 = params.omega23
    p2 = params.phase2
    p3 = params.phase3

    def rhs(t, y, yd):
        """yd is the delayed 4-tuple of the *other* atom's history slot
        (full state; the cross terms pick the partner), or None before the
        light-crossing time."""
        a2, a3, b2, b3 = y
        rot = cmath.exp(-1j * w23 * t)      # e^{-i w23 t}
        crot = rot.conjugate()
        if yd is None:
            qa2, qa3 = a2, a3
            qb2, qb3 = b2, b3
        else:
            d2a, d3a, d2b, d3b = yd
            qa2 = a2 + p2 * d2b
            qa3 = a3 + p3 * d3b
            qb2 = b2 + p2 * d2a
            qb3 = b3 + p3 * d3a
        return (-(g22h * qa2 + g23h * crot * qa3),
                -(g32h * rot * qa2 + g33h * qa3),
                -(g22h * qb2 + g23h * crot * qb3),
                -(g32h * rot * qb2 + g33h * qb3))

    return rhs


def _axpy(y, c, k):
    return (y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2], y[3] + c * k[3])


def _norm2(y):
    return (abs(y[0]) ** 2 + abs(y[1]) ** 2 + abs(y[2]) ** 2 + abs(y[3]) ** 2)


def dde_integrate(params: SystemParams, init: InitialState,
                  cfg: DdeConfig = DdeConfig()) -> AmplitudeTrace:
    """Integrate the retarded amplitude equations from an arbitrary
    single-excitation initial state.  Returns the trace on the adjusted
    uniform grid (contains t = d/v exactly when the delay is resolvable)."""
    h, n, m = cfg.resolve(params)
    rhs = _make_rhs(params)
    cubic = cfg.history_interp == "cubic"
    hh = 0.5 * h
    y = (init.k2a, init.k3a, init.k2b, init.k3b)
    ys = [y]
    ds = []               # right-sided derivative at each grid point
    left_at_kink = None   # left-sided derivative at t = d/v (index m)
    zero_delay = (m == 0)  # coincident atoms (or sub-resolution separation)

    check_every = 200
    for k in range(n):
        t = k * h
        if m > 0 and k >= m:
            j0 = k - m
            j1 = j0 + 1
            y0h, y1h = ys[j0], ys[j1]
            k1 = rhs(t, y, y0h)
            if j1 == m:
                d1 = left_at_kink
            elif j1 == k:
                d1 = k1   # right-sided == true derivative away from the kink
            else:
                d1 = ds[j1]
            if cubic:
                d0 = ds[j0]
                c = h / 8.0
                ymid = (0.5 * (y0h[0] + y1h[0]) + c * (d0[0] - d1[0]),
                        0.5 * (y0h[1] + y1h[1]) + c * (d0[1] - d1[1]),
                        0.5 * (y0h[2] + y1h[2]) + c * (d0[2] - d1[2]),
                        0.5 * (y0h[3] + y1h[3]) + c * (d0[3] - d1[3]))
            else:
                ymid = (0.5 * (y0h[0] + y1h[0]), 0.5 * (y0h[1] + y1h[1]),
                        0.5 * (y0h[2] + y1h[2]), 0.5 * (y0h[3] + y1h[3]))
            k2 = rhs(t + hh, _axpy(y, hh, k1), ymid)
            k3 = rhs(t + hh, _axpy(y, hh, k2), ymid)
            k4 = rhs(t + h, _axpy(y, h, k3), y1h)
        elif zero_delay:
            y1 = y
            k1 = rhs(t, y1, y1)
            y2 = _axpy(y, hh, k1)
            k2 = rhs(t + hh, y2, y2)
            y3 = _axpy(y, hh, k2)
            k3 = rhs(t + hh, y3, y3)
            y4 = _axpy(y, h, k3)
            k4 = rhs(t + h, y4, y4)
        else:
            k1 = rhs(t, y, None)
            k2 = rhs(t + hh, _axpy(y, hh, k1), None)
            k3 = rhs(t + hh, _axpy(y, hh, k2), None)
            k4 = rhs(t + h, _axpy(y, h, k3), None)
        y = (y[0] + (h / 6.0) * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]),
             y[1] + (h / 6.0) * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]),
             y[2] + (h / 6.0) * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2]),
             y[3] + (h / 6.0) * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3]))
        ds.append(k1)
        ys.append(y)
        if m > 0 and k + 1 == m:
            # left-sided derivative at the kink, before the delay switches on
            left_at_kink = rhs((k + 1) * h, y, None)
        if (k + 1) % check_every == 0:
            n2 = _norm2(y)
            # not-<= instead of > so an overflow that already went NaN
            # still trips the guard
            if not n2 <= 1.0 + NORM_RUNAWAY_TOL:
                raise NormViolation(
                    f"total population {n2:.6f} exceeds 1 at t = {(k + 1) * h:.4f}")

    arr = np.array(ys, dtype=complex)
    times = np.arange(n + 1) * h
    return AmplitudeTrace(times=times, ca2=arr[:, 0], ca3=arr[:, 1],
                          cb2=arr[:, 2], cb3=arr[:, 3], provenance="dde")


def convergence_study(params: SystemParams, init: InitialState,
                      steps, t_max: float = 2.0,
                      history_interp: str = "cubic") -> float:
    """Self-convergence order estimate from runs at decreasing steps.

    Consecutive runs are compared in sup norm on the coarser grid (finer
    trace read off by cubic interpolation); the order is the mean Richardson
    exponent.  Needs at least three strictly decreasing distinct steps.
    """
    steps = sorted(set(float(s) for s in steps), reverse=True)
    if len(steps) < 3:
        raise NonDistinctSteps("need at least three distinct step sizes")
    runs = []
    for s in steps:
        cfg = DdeConfig(step=s, t_max=t_max, history_interp=history_interp)
        h, _, _ = cfg.resolve(params)
        runs.append((h, dde_integrate(params, init, cfg)))
    if len({h for h, _ in runs}) != len(runs):
        raise NonDistinctSteps("steps collapse to identical delay-locked grids")

    from .dynamics import cubic_interp

    def sup_diff(coarse: AmplitudeTrace, fine: AmplitudeTrace) -> float:
        tq = coarse.times
        tq = tq[tq <= fine.times[-1] + 1e-12]
        dev = 0.0
        for a, b in zip(coarse.amplitude_components(), fine.amplitude_components()):
            bi = cubic_interp(fine.times, b, tq)
            dev = max(dev, float(np.max(np.abs(a[: tq.size] - bi))))
        return dev

    errs = [sup_diff(runs[i][1], runs[i + 1][1]) for i in range(len(runs) - 1)]
    orders = []
    for i in range(len(errs) - 1):
        r = runs[i][0] / runs[i + 1][0]
        if errs[i + 1] == 0 or errs[i] == 0:
            continue
        orders.append(math.log(errs[i] / errs[i + 1]) / math.log(r))
    if not orders:
        raise NonDistinctSteps("differences vanished; steps too close to estimate an order")
    return float(np.mean(orders))
