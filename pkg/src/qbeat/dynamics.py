"""Amplitude dynamics: closed forms, mode-sum evaluation, and composition.

All amplitudes live in the interaction picture: level-2 amplitudes rotate out
the 2->1 transition frequency, level-3 amplitudes the 3->1 one.  Populations
are plain |c|^2, so pictures do not matter for observables.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import GridMismatch, IncompleteExpansion
from .params import InitialState, SystemParams
from .spectral import ModeExpansion

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

#: default sampling density of uniform time grids (samples per 1/gamma22)
GRID_POINTS_PER_UNIT = 2000

#: total population may exceed 1 by at most this much on any valid trace
POPULATION_TOL = 1e-6


@dataclass(frozen=True)
class AmplitudeTrace:
    """Four interaction-picture amplitudes on a shared uniform time grid.

    provenance records which engine produced the trace ('mode_sum', 'dde',
    'closed_form').  alpha_defect/beta_defect carry the residue-sum
    truncation defects when the trace came from a windowed mode expansion.
    """

    times: np.ndarray
    ca2: np.ndarray
    ca3: np.ndarray
    cb2: np.ndarray
    cb3: np.ndarray
    provenance: str
    alpha_defect: float | None = None
    beta_defect: float | None = None

    def __post_init__(self):
        n = self.times.shape[0]
        for arr in (self.ca2, self.ca3, self.cb2, self.cb3):
            if arr.shape != (n,):
                raise GridMismatch("amplitude arrays must match the time grid")
        for arr in (self.times, self.ca2, self.ca3, self.cb2, self.cb3):
            arr.setflags(write=False)

    @property
    def pop2a(self) -> np.ndarray:
        return np.abs(self.ca2) ** 2

    @property
    def pop3a(self) -> np.ndarray:
        return np.abs(self.ca3) ** 2

    @property
    def pop2b(self) -> np.ndarray:
        return np.abs(self.cb2) ** 2

    @property
    def pop3b(self) -> np.ndarray:
        return np.abs(self.cb3) ** 2

    @property
    def total_population(self) -> np.ndarray:
        return self.pop2a + self.pop3a + self.pop2b + self.pop3b

    def amplitude_components(self):
        return (self.ca2, self.ca3, self.cb2, self.cb3)

    def max_deviation(self, other: "AmplitudeTrace", t_min: float | None = None) -> float:
        """Largest |difference| over all four components (optionally for
        t > t_min only)."""
        if self.times.shape != other.times.shape or not np.allclose(
                self.times, other.times, rtol=0.0, atol=1e-12):
            raise GridMismatch("traces live on different time grids")
        mask = slice(None) if t_min is None else self.times > t_min
        dev = 0.0
        for a, b in zip(self.amplitude_components(), other.amplitude_components()):
            dev = max(dev, float(np.max(np.abs(a[mask] - b[mask]), initial=0.0)))
        return dev


def commensurate_step(delay: float, step: float) -> tuple[float, int]:
    """Adjust a requested step so the delay is an exact integer multiple.

    Returns (adjusted_step, delay_steps).  delay_steps = 0 means the delay is
    negligible at this resolution (shorter than step/100) and should be
    treated as zero.
    """
    if delay <= 0:
        return step, 0
    if delay < step / 100.0:
        return step, 0
    m = max(1, round(delay / step))
    return delay / m, m


def time_grid(t_max: float, step: float | None = None, delay: float = 0.0,
              gamma22: float = 1.0) -> np.ndarray:
    """Uniform grid [0, ~t_max] that contains the delay exactly when the
    delay is resolvable."""
    if step is None:
        step = 1.0 / (GRID_POINTS_PER_UNIT * gamma22)
    h, _ = commensurate_step(delay, step)
    n = max(1, round(t_max / h))
    return np.arange(n + 1) * h


def cubic_interp(tgrid: np.ndarray, values: np.ndarray, tq: np.ndarray) -> np.ndarray:
    """Cubic Hermite interpolation on a uniform grid (Catmull-Rom slopes,
    second-order one-sided at the ends, so quadratics are reproduced in every
    cell).  Exact at the nodes; queries may exceed the grid by at most a half
    step (clamped)."""
    t0 = float(tgrid[0])
    h = float(tgrid[1] - tgrid[0])
    n = tgrid.size
    u = (np.asarray(tq, dtype=float) - t0) / h
    if np.any(u < -0.5) or np.any(u > n - 0.5):
        raise ValueError("interpolation query outside the stored grid")
    u = np.clip(u, 0.0, n - 1.0)
    i = np.minimum(u.astype(int), n - 2)
    f = u - i
    y0 = values[i]
    y1 = values[i + 1]
    im = np.maximum(i - 1, 0)
    ip = np.minimum(i + 2, n - 1)
    if n >= 3:
        d0 = np.where(i == 0, 0.5 * (-3.0 * y0 + 4.0 * y1 - values[ip]),
                      0.5 * (y1 - values[im]))
        d1 = np.where(i + 1 == n - 1, 0.5 * (3.0 * y1 - 4.0 * y0 + values[im]),
                      0.5 * (values[ip] - y0))
    else:
        d0 = y1 - y0
        d1 = y1 - y0
    f2 = f * f
    f3 = f2 * f
    return ((2 * f3 - 3 * f2 + 1) * y0 + (f3 - 2 * f2 + f) * d0
            + (-2 * f3 + 3 * f2) * y1 + (f3 - f2) * d1)


# -- closed forms -------------------------------------------------------


def _two_level_beat(times: np.ndarray, amplitude: complex, g22: float, g33: float,
                    g23: float, g32: float, w23: float):
    """Shared closed-form kernel: level-2/level-3 amplitudes of a V system
    decaying with rates g_jl, valid to O(g^2/w23^2) in the well-separated
    regime.  `amplitude` is the initial level-2 amplitude."""
    t = np.asarray(times, dtype=float)
    e2 = np.exp(-0.5 * g22 * t)
    e3 = np.exp(-0.5 * g33 * t)
    rot = np.exp(1j * w23 * t)
    c2 = amplitude * (e2 - (g23 * g32 / (4.0 * w23 * w23)) * e3 * rot)
    c3 = amplitude * (0.5j * g32 / w23) * (e3 - e2 / rot)
    return c2, c3


def single_atom_amplitudes(params: SystemParams, times: np.ndarray,
                           amplitude: complex = _INV_SQRT2):
    """Exact isolated-atom amplitudes (partner infinitely far away).

    The one-atom block of the equations of motion closes on (c2, c3) with
    instantaneous self-coupling only; diagonalizing the 2x2 generator in
    the mixed frame u = e^{i w23 t} c3 gives a two-mode solution whose
    coefficients sum exactly to the initial condition, so there is no
    O(gamma/omega23) error here, unlike the well-separated-levels forms.
    Returns (c2, c3) for an atom starting in level 2 with the given
    amplitude."""
    t = np.asarray(times, dtype=float)
    a = -0.5 * params.gamma22
    b = -0.5 * params.gamma23
    c = -0.5 * params.gamma32
    d = 1j * params.omega23 - 0.5 * params.gamma33
    disc = cmath.sqrt((a - d) * (a - d) + 4.0 * b * c)
    sp = 0.5 * ((a + d) + disc)
    sm = 0.5 * ((a + d) - disc)
    ep = np.exp(sp * t)
    em = np.exp(sm * t)
    c2 = amplitude * ((a - sm) * ep - (a - sp) * em) / (sp - sm)
    u = amplitude * c * (ep - em) / (sp - sm)
    return c2, u * np.exp(-1j * params.omega23 * t)


def single_atom_reference(params: SystemParams, times: np.ndarray,
                          amplitude: complex = _INV_SQRT2) -> AmplitudeTrace:
    """Independent-emission reference: one isolated atom carrying a single
    atom's share (1/sqrt2) of the excitation; the partner slot stays empty."""
    c2, c3 = single_atom_amplitudes(params, times, amplitude)
    zero = np.zeros_like(c2)
    return AmplitudeTrace(times=np.asarray(times, dtype=float), ca2=c2, ca3=c3,
                          cb2=zero, cb3=zero.copy(), provenance="closed_form")


def closed_form_coincident(params: SystemParams, sector, times: np.ndarray) -> AmplitudeTrace:
    """Zero-separation sector dynamics in the well-separated-levels limit.

    Symmetric sector: collective (doubled) rates,
        c2 = (1/sqrt2)[e^{-G22 t} - (G32 G23/w23^2) e^{-G33 t} e^{i w23 t}],
        c3 = (i G32/(sqrt2 w23))[e^{-G33 t} - e^{-G22 t} e^{-i w23 t}].
    Antisymmetric sector: frozen, c2 = 1/sqrt2, c3 = 0.
    """
    t = np.asarray(times, dtype=float)
    if sector.sign > 0:
        c2, c3 = _two_level_beat(t, _INV_SQRT2, 2.0 * params.gamma22,
                                 2.0 * params.gamma33, 2.0 * params.gamma23,
                                 2.0 * params.gamma32, params.omega23)
        cb2, cb3 = c2.copy(), c3.copy()
    else:
        c2 = np.full(t.shape, _INV_SQRT2, dtype=complex)
        c3 = np.zeros(t.shape, dtype=complex)
        cb2, cb3 = -c2, -c3
    return AmplitudeTrace(times=t, ca2=c2, ca3=c3, cb2=cb2, cb3=cb3,
                          provenance="closed_form")


# -- mode sums ----------------------------------------------------------

_CHUNK = 512  # time samples per block when materializing exp(outer(t, s))


def amplitudes_from_modes(expansion: ModeExpansion, times: np.ndarray) -> AmplitudeTrace:
    """Evaluate the sector trace from a completed mode expansion.

    For t > d/v the delay-shifted coefficients give
        cA2(t) = sum_n alpha_bar_n e^{s_n (t - d/v)},
        cA3(t) = e^{-i w23 d/v} sum_n beta_bar_n e^{(s_n - i w23)(t - d/v)},
    and cB = (+/-) cA.  The constant phase on cA3 restores the absolute-time
    rotation e^{-i w23 t}; dropping it flips the beat sign whenever d is a
    half-integer multiple of the beat wavelength.  For t <= d/v no signal has crossed yet and each atom
    follows the isolated-atom closed form with amplitude 1/sqrt2.
    """
    if not expansion.is_complete:
        raise IncompleteExpansion("run residues() before evaluating amplitudes")
    params = expansion.params
    sg = float(expansion.sector.sign)
    t = np.asarray(times, dtype=float)
    tau = params.delay
    ca2 = np.empty(t.shape, dtype=complex)
    ca3 = np.empty(t.shape, dtype=complex)

    pre = t < tau if tau > 0 else np.zeros(t.shape, dtype=bool)
    if pre.any():
        c2p, c3p = single_atom_amplitudes(params, t[pre])
        ca2[pre], ca3[pre] = c2p, c3p

    post = ~pre
    if post.any():
        dt = t[post] - tau
        s = expansion.eigenvalues
        ab = expansion.alpha_bars
        bb = expansion.beta_bars
        out2 = np.empty(dt.shape, dtype=complex)
        out3 = np.empty(dt.shape, dtype=complex)
        for i in range(0, dt.size, _CHUNK):
            blk = dt[i:i + _CHUNK]
            ek = np.exp(blk[:, None] * s[None, :])
            out2[i:i + _CHUNK] = ek @ ab
            out3[i:i + _CHUNK] = (ek @ bb)
        # rotate with absolute time: beta_bar = beta e^{s tau} carries no
        # omega23 part, so e^{-i w23 t} = e^{-i w23 (t-tau)} e^{-i w23 tau}
        out3 *= np.exp(-1j * params.omega23 * (dt + tau))
        ca2[post], ca3[post] = out2, out3

    da, db = expansion.residue_defects()
    return AmplitudeTrace(times=t, ca2=ca2, ca3=ca3, cb2=sg * ca2, cb3=sg * ca3,
                          provenance="mode_sum", alpha_defect=da, beta_defect=db)


def compose_general_state(init: InitialState, trace_plus: AmplitudeTrace,
                          trace_minus: AmplitudeTrace) -> AmplitudeTrace:
    """Linear composition of the two sector traces for a general level-2
    initial state: c(t) = w+ c^{(+)}(t) + w- c^{(-)}(t)."""
    if trace_plus.times.shape != trace_minus.times.shape or not np.allclose(
            trace_plus.times, trace_minus.times, rtol=0.0, atol=1e-12):
        raise GridMismatch("sector traces live on different time grids")
    wp, wm = init.sector_weights
    comps = [wp * a + wm * b for a, b in zip(trace_plus.amplitude_components(),
                                             trace_minus.amplitude_components())]
    prov = trace_plus.provenance if trace_plus.provenance == trace_minus.provenance \
        else f"{trace_plus.provenance}+{trace_minus.provenance}"
    return AmplitudeTrace(times=trace_plus.times.copy(), ca2=comps[0], ca3=comps[1],
                          cb2=comps[2], cb3=comps[3], provenance=prov)


def level3_substitution(params: SystemParams) -> SystemParams:
    """Parameter swap that lets an initial level-3 excitation reuse the
    level-2 machinery: omega23 -> -omega23, gamma22 <-> gamma33,
    gamma23 <-> gamma32.  The propagation-phase override is mapped to the
    original level-3 phase so the swap stays exact at finite separation and
    involutive."""
    return replace(params,
                   gamma22=params.gamma33, gamma33=params.gamma22,
                   gamma23=params.gamma32, gamma32=params.gamma23,
                   omega23=-params.omega23,
                   phi2=params.phi3_effective)
