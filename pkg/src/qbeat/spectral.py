"""Spectral solution: sector propagator, pole search, and residues.

The Laplace-domain inverse propagator of each exchange-symmetry sector is an
entire function of s (quadratic polynomial plus delay exponentials), so its
zeros are the collective complex eigenfrequencies.  Poles are located with a
damped Newton iteration seeded on a rectangular grid and certified against a
winding-number count of the inverse propagator along the window boundary.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (BoundaryPole, CountMismatch, DegeneratePole,
                     IncompleteExpansion, NonConvergence, QbeatError)
from .params import SystemParams

log = logging.getLogger(__name__)

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

#: certification bound: |G^{-1}(s_n)| < TOL_RESIDUAL * (1 + |s_n|^2)
TOL_RESIDUAL = 1e-9
#: two candidate poles closer than DEDUPE_TOL * max(1, |s|) are one pole
DEDUPE_TOL = 1e-6
#: |f'(s_n)| below TOL_DERIV * (1 + |s_n|) means a degenerate root
TOL_DERIV = 1e-8
#: emitted modes must satisfy Re s <= PASSIVITY_TOL
PASSIVITY_TOL = 1e-7


@dataclass(frozen=True)
class SymmetrySector:
    """Exchange-symmetry sector: sign +1 (symmetric) or -1 (antisymmetric)."""

    sign: int

    def __post_init__(self):
        if self.sign not in (+1, -1):
            raise ValueError("sector sign must be +1 or -1")

    @property
    def label(self) -> str:
        return "sym" if self.sign > 0 else "antisym"


SYMMETRIC = SymmetrySector(+1)
ANTISYMMETRIC = SymmetrySector(-1)


def sector_from_label(label: str) -> SymmetrySector:
    if label in ("sym", "+", "symmetric"):
        return SYMMETRIC
    if label in ("antisym", "-", "antisymmetric"):
        return ANTISYMMETRIC
    raise ValueError(f"unknown sector {label!r}")


@dataclass(frozen=True)
class SearchWindow:
    """Rectangle |Re s| < re_max, |Im s| < im_max for the pole search.

    grid_re/grid_im are seed counts per axis; None picks a density of at
    least four seeds per expected pole spacing 2*pi*v/d along Im.
    """

    re_max: float
    im_max: float
    grid_re: int | None = None
    grid_im: int | None = None

    def __post_init__(self):
        if self.re_max <= 0 or self.im_max <= 0:
            raise ValueError("window half-widths must be positive")
        for g in (self.grid_re, self.grid_im):
            if g is not None and g < 8:
                raise ValueError("seed grids need at least 8 points per axis")

    @property
    def rect(self) -> tuple[float, float, float, float]:
        return (-self.re_max, self.re_max, -self.im_max, self.im_max)


WINDOW_PRESETS = ("markovian", "nonmarkovian")


def window_preset(name: str, params: SystemParams) -> SearchWindow:
    """Preset windows: 'markovian' spans 200 gamma22 x 200 omega23,
    'nonmarkovian' 10 gamma22 x 10 omega23."""
    w23 = abs(params.omega23)
    if name == "markovian":
        return SearchWindow(200.0 * params.gamma22, 200.0 * w23)
    if name == "nonmarkovian":
        return SearchWindow(10.0 * params.gamma22, 10.0 * w23)
    raise ValueError(f"unknown window preset {name!r} (expected one of {WINDOW_PRESETS})")


@dataclass(frozen=True)
class Mode:
    """One collective mode: eigenvalue s and (optionally) its residues.

    alpha/beta weight the level-2/level-3 amplitude sums; alpha_bar/beta_bar
    are the delay-shifted coefficients alpha*e^{s d/v}, beta*e^{s d/v} used
    for t > d/v.
    """

    s: complex
    alpha: complex | None = None
    beta: complex | None = None
    alpha_bar: complex | None = None
    beta_bar: complex | None = None

    @property
    def is_complete(self) -> bool:
        return self.alpha is not None


@dataclass(frozen=True)
class ModeExpansion:
    """Certified pole set of one sector within a search window."""

    params: SystemParams
    sector: SymmetrySector
    window: SearchWindow
    modes: tuple[Mode, ...]

    @property
    def is_complete(self) -> bool:
        return all(m.is_complete for m in self.modes)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.s for m in self.modes], dtype=complex)

    def _coeff(self, name: str) -> np.ndarray:
        if not self.is_complete:
            raise IncompleteExpansion("residues have not been attached to this expansion")
        return np.array([getattr(m, name) for m in self.modes], dtype=complex)

    @property
    def alphas(self) -> np.ndarray:
        return self._coeff("alpha")

    @property
    def betas(self) -> np.ndarray:
        return self._coeff("beta")

    @property
    def alpha_bars(self) -> np.ndarray:
        return self._coeff("alpha_bar")

    @property
    def beta_bars(self) -> np.ndarray:
        return self._coeff("beta_bar")

    def residue_defects(self) -> tuple[float, float]:
        """(|sum alpha - 1/sqrt(2)|, |sum beta|): truncation defects of the
        initial-value identities for the sector state."""
        a = self.alphas.sum()
        b = self.betas.sum()
        return (abs(a - _INV_SQRT2), abs(b))


# -- inverse propagator ------------------------------------------------


def _factors(s, params: SystemParams, sector: SymmetrySector):
    """Common pieces of the inverse propagator at s (scalar or ndarray)."""
    tau = params.delay
    e = params.phase2 * np.exp(-tau * np.asarray(s, dtype=complex))
    sg = float(sector.sign)
    f1 = s - 1j * params.omega23 + 0.5 * params.gamma33 * (1.0 + sg * e)
    f2 = s + 0.5 * params.gamma22 * (1.0 + sg * e)
    f3 = 1.0 + sg * e
    return e, f1, f2, f3


def inverse_propagator(s, params: SystemParams, sector: SymmetrySector):
    """Inverse sector propagator

        f(s) = (s - i w23 + (G33/2)(1 +/- E))(s + (G22/2)(1 +/- E))
               - (G23 G32 / 4)(1 +/- E)^2,   E = e^{i phi2} e^{-(d/v) s}.

    Accepts complex scalars or arrays; entire in s, so its zeros are exactly
    the sector poles.
    """
    _, f1, f2, f3 = _factors(s, params, sector)
    cross = params.gamma23 * params.gamma32
    return f1 * f2 - 0.25 * cross * f3 * f3


def inverse_propagator_deriv(s, params: SystemParams, sector: SymmetrySector):
    """Analytic d/ds of the inverse propagator (same conventions)."""
    tau = params.delay
    e, f1, f2, f3 = _factors(s, params, sector)
    sg = float(sector.sign)
    de = -tau * e                    # dE/ds
    df1 = 1.0 + 0.5 * params.gamma33 * sg * de
    df2 = 1.0 + 0.5 * params.gamma22 * sg * de
    df3 = sg * de
    cross = params.gamma23 * params.gamma32
    return df1 * f2 + f1 * df2 - 0.5 * cross * f3 * df3


def coincident_pole_pair(params: SystemParams, sector: SymmetrySector) -> tuple[complex, complex]:
    """Exact zero-separation poles of a sector.

    Antisymmetric: {0, i*omega23} (dark pair).  Symmetric:
    -(G22+G33)/2 + i(omega23 +/- delta)/2 with
    delta = sqrt(omega23^2 - (G22+G33)^2 - 2i*omega23*(G22-G33)); requires
    the parallel-dipole cross rates, for which the d=0 quadratic factors.
    """
    w = params.omega23
    if sector.sign < 0:
        return (0j, 1j * w)
    gsum = params.gamma22 + params.gamma33
    gdiff = params.gamma22 - params.gamma33
    delta = cmath.sqrt(w * w - gsum * gsum - 2j * w * gdiff)
    return (-0.5 * gsum + 0.5j * (w + delta), -0.5 * gsum + 0.5j * (w - delta))


# -- pole search --------------------------------------------------------


def _certified(s, params, sector) -> bool:
    f = inverse_propagator(s, params, sector)
    return abs(f) < TOL_RESIDUAL * (1.0 + abs(s) ** 2)


def _newton_sweep(seeds: np.ndarray, params: SystemParams, sector: SymmetrySector,
                  step_clip: float, max_iter: int = 80) -> np.ndarray:
    """Run clipped Newton iterations from every seed; return the subset that
    converged to a certified zero."""
    s = np.asarray(seeds, dtype=complex).copy()
    active = np.ones(s.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        sa = s[active]
        f = inverse_propagator(sa, params, sector)
        df = inverse_propagator_deriv(sa, params, sector)
        bad = (df == 0) | ~np.isfinite(df) | ~np.isfinite(f)
        df = np.where(bad, 1.0, df)
        step = f / df
        step = np.where(bad, step_clip * 2.0, step)  # kick degenerate points out
        mag = np.abs(step)
        over = mag > step_clip
        step = np.where(over, step * (step_clip / np.where(mag == 0, 1.0, mag)), step)
        s_new = sa - step
        done = np.abs(step) < 1e-13 * np.maximum(1.0, np.abs(sa))
        s[active] = s_new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    f = inverse_propagator(s, params, sector)
    ok = np.isfinite(s) & (np.abs(f) < TOL_RESIDUAL * (1.0 + np.abs(s) ** 2))
    return s[ok]


def newton_refine(s0: complex, params: SystemParams, sector: SymmetrySector,
                  max_iter: int = 80) -> complex:
    """Refine a single pole estimate; raises NonConvergence on failure."""
    out = _newton_sweep(np.array([s0]), params, sector,
                        step_clip=max(1.0, abs(s0)), max_iter=max_iter)
    if out.size == 0:
        raise NonConvergence(f"Newton iteration from {s0} did not certify a pole")
    return complex(out[0])


def _dedupe(cands: np.ndarray) -> list[complex]:
    """Greedy clustering with radius DEDUPE_TOL * max(1, |s|)."""
    order = np.lexsort((cands.real, cands.imag))
    kept: list[complex] = []
    for s in cands[order]:
        s = complex(s)
        tol = DEDUPE_TOL * max(1.0, abs(s))
        if all(abs(s - p) > tol for p in kept):
            kept.append(s)
    return kept


def _in_rect(s: complex, rect, margin: float = 0.0) -> bool:
    re_lo, re_hi, im_lo, im_hi = rect
    return (re_lo + margin < s.real < re_hi - margin
            and im_lo + margin < s.imag < im_hi - margin)


def _seed_grid(params: SystemParams, window: SearchWindow, rect=None,
               densify: int = 1) -> np.ndarray:
    re_lo, re_hi, im_lo, im_hi = rect if rect is not None else window.rect
    tau = params.delay
    if window.grid_im is not None:
        n_im = window.grid_im
    elif tau > 0:
        spacing = 2.0 * math.pi / tau  # asymptotic pole spacing along Im
        n_im = int(min(6000, max(16, math.ceil(4.0 * (im_hi - im_lo) / spacing))))
    else:
        n_im = 16
    n_re = window.grid_re if window.grid_re is not None else 16
    n_im = max(8, n_im * densify)
    n_re = max(8, n_re * densify)
    # offset half a cell so seeds avoid the contour itself
    re = np.linspace(re_lo, re_hi, n_re + 1)[:-1] + (re_hi - re_lo) / (2 * n_re)
    im = np.linspace(im_lo, im_hi, n_im + 1)[:-1] + (im_hi - im_lo) / (2 * n_im)
    return (re[None, :] + 1j * im[:, None]).ravel()


def _harvest(params, sector, window, rect=None, densify=1) -> list[complex]:
    seeds = _seed_grid(params, window, rect=rect, densify=densify)
    hints = list(coincident_pole_pair(params, sector))
    seeds = np.concatenate([seeds, np.array(hints, dtype=complex)])
    re_lo, re_hi, im_lo, im_hi = rect if rect is not None else window.rect
    clip = max(2.0 * (im_hi - im_lo) / max(8, seeds.size // 16), 2.0)
    found = _newton_sweep(seeds, params, sector, step_clip=clip)
    target = rect if rect is not None else window.rect
    return [s for s in _dedupe(found) if _in_rect(s, target)]


# -- winding-number certification ---------------------------------------


_MAX_EDGE_POINTS = 2_000_000
_PHASE_LIMIT = 0.5 * math.pi


def _edge_phase_change(params, sector, z0: complex, z1: complex) -> float:
    """Total change of arg f along the segment z0 -> z1, by adaptive
    refinement until every sub-segment turns by less than pi/2."""
    tau = params.delay
    cycles = tau * abs(z1.imag - z0.imag) / (2.0 * math.pi)
    n0 = int(min(200_000, 17 + 8 * math.ceil(cycles)))
    t = np.linspace(0.0, 1.0, n0)
    z = z0 + (z1 - z0) * t
    f = inverse_propagator(z, params, sector)
    if not np.all(np.isfinite(f)) or np.any(f == 0):
        raise BoundaryPole("inverse propagator vanished or overflowed on the contour")
    ph = np.angle(f)
    for _ in range(60):
        d = np.diff(ph)
        d = (d + math.pi) % (2.0 * math.pi) - math.pi
        bad = np.abs(d) > _PHASE_LIMIT
        if not bad.any():
            return float(d.sum())
        if t.size > _MAX_EDGE_POINTS:
            break
        mids = 0.5 * (t[:-1][bad] + t[1:][bad])
        zm = z0 + (z1 - z0) * mids
        fm = inverse_propagator(zm, params, sector)
        if not np.all(np.isfinite(fm)) or np.any(fm == 0):
            raise BoundaryPole("inverse propagator vanished or overflowed on the contour")
        t = np.concatenate([t, mids])
        ph = np.concatenate([ph, np.angle(fm)])
        order = np.argsort(t, kind="stable")
        t = t[order]
        ph = ph[order]
    raise BoundaryPole("contour phase did not resolve; a pole sits on or near the boundary")


def _winding_count(params, sector, rect) -> int:
    re_lo, re_hi, im_lo, im_hi = rect
    corners = [complex(re_lo, im_lo), complex(re_hi, im_lo),
               complex(re_hi, im_hi), complex(re_lo, im_hi)]
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        total += _edge_phase_change(params, sector, a, b)
    w = total / (2.0 * math.pi)
    if abs(w - round(w)) > 0.25:
        raise BoundaryPole(f"non-integer winding number {w:.3f}")
    return int(round(w))


def count_poles(params: SystemParams, sector: SymmetrySector,
                window: SearchWindow) -> int:
    """Number of sector poles strictly inside the window, by the argument
    principle (the inverse propagator is entire, so the winding number of
    f along the boundary counts its zeros with multiplicity)."""
    return _winding_count(params, sector, window.rect)


def _count_with_retry(params, sector, rect, poles) -> int:
    """Winding count with a retry ladder that nudges the rectangle outward
    when a zero sits numerically on the boundary.  Expansions are kept below
    the dedupe radius so the counted set cannot change."""
    for expand in (0.0, 1e-8, 1e-7, 3e-7):
        re_lo, re_hi, im_lo, im_hi = rect
        scale = 1.0 + max(abs(re_hi), abs(im_hi))
        r = (re_lo - expand * scale, re_hi + expand * scale,
             im_lo - expand * scale, im_hi + expand * scale)
        try:
            return _winding_count(params, sector, r)
        except BoundaryPole:
            log.debug("boundary pole suspected for rect %s, expanding by %g", rect, expand)
            continue
    raise BoundaryPole(f"could not certify pole count for rectangle {rect}")


def _split_rect(rect):
    re_lo, re_hi, im_lo, im_hi = rect
    if (re_hi - re_lo) >= (im_hi - im_lo):
        mid = 0.5 * (re_lo + re_hi)
        return (re_lo, mid, im_lo, im_hi), (mid, re_hi, im_lo, im_hi)
    mid = 0.5 * (im_lo + im_hi)
    return (re_lo, re_hi, im_lo, mid), (re_lo, re_hi, mid, im_hi)


def _reconcile(params, sector, window, rect, poles: list[complex],
               depth: int) -> list[complex]:
    """Recursively reseed subrectangles until the certified pole list agrees
    with the winding count on every piece."""
    counted = _count_with_retry(params, sector, rect, poles)
    mine = [p for p in poles if _in_rect(p, rect)]
    if counted == len(mine):
        return mine
    if counted < len(mine):
        raise CountMismatch(len(mine), counted,
                            f"more certified poles ({len(mine)}) than the contour count "
                            f"({counted}) in {rect}; duplicate or spurious root")
    extra = _harvest(params, sector, window, rect=rect, densify=4)
    merged = _dedupe(np.array(mine + extra, dtype=complex)) if (mine or extra) else []
    merged = [p for p in merged if _in_rect(p, rect)]
    if counted == len(merged):
        return merged
    if depth <= 0:
        raise CountMismatch(len(merged), counted,
                            f"{counted - len(merged)} pole(s) unlocated in {rect}")
    r1, r2 = _split_rect(rect)
    return (_reconcile(params, sector, window, r1, merged, depth - 1)
            + _reconcile(params, sector, window, r2, merged, depth - 1))


def find_poles(params: SystemParams, sector: SymmetrySector,
               window: SearchWindow) -> ModeExpansion:
    """Locate every sector pole inside the window.

    Newton from a rectangular seed grid, deduplication, certification of
    |f(s_n)| against TOL_RESIDUAL, and an argument-principle count; on a
    count mismatch, mismatching subrectangles are reseeded at higher density
    before giving up with CountMismatch.  d = 0 short-circuits to the exact
    coincident pole pair.
    """
    if params.distance == 0.0:
        cands = [s for s in coincident_pole_pair(params, sector)
                 if _in_rect(s, window.rect)]
        poles = []
        for s in cands:
            # polish (antisym zeros are exact; sym pair is, up to rounding)
            try:
                poles.append(newton_refine(s, params, sector))
            except NonConvergence:
                if _certified(s, params, sector):
                    poles.append(s)
                else:
                    raise
        poles = _dedupe(np.array(poles, dtype=complex)) if poles else []
    else:
        poles = _harvest(params, sector, window)
    counted = _count_with_retry(params, sector, window.rect, poles)
    if counted != len(poles):
        log.info("pole count mismatch (found %d, counted %d); refining",
                 len(poles), counted)
        poles = _reconcile(params, sector, window, window.rect, poles, depth=7)
    for p in poles:
        if p.real > PASSIVITY_TOL:
            raise QbeatError(f"pole {p} has positive real part beyond tolerance")
    poles.sort(key=lambda s: (s.imag, s.real))
    modes = tuple(Mode(s=p) for p in poles)
    return ModeExpansion(params=params, sector=sector, window=window, modes=modes)


# -- residues -----------------------------------------------------------


def residues(expansion: ModeExpansion) -> ModeExpansion:
    """Attach residues to every mode of a certified expansion.

    alpha_n = (1/sqrt2) F1(s_n) / f'(s_n),
    beta_n  = -(1/sqrt2)(G32/2)(1 +/- E(s_n)) / f'(s_n),
    with the delay-shifted variants alpha_n e^{s_n d/v}, beta_n e^{s_n d/v}.
    Raises DegeneratePole when f' is numerically zero at a pole.
    """
    params, sector = expansion.params, expansion.sector
    tau = params.delay
    out = []
    for mode in expansion.modes:
        s = mode.s
        df = inverse_propagator_deriv(s, params, sector)
        if abs(df) < TOL_DERIV * (1.0 + abs(s)):
            raise DegeneratePole(s)
        _, f1, _, f3 = _factors(s, params, sector)
        alpha = _INV_SQRT2 * complex(f1) / complex(df)
        beta = -_INV_SQRT2 * 0.5 * params.gamma32 * complex(f3) / complex(df)
        shift = cmath.exp(s * tau)  # |e^{s tau}| <= 1 since Re s <= 0
        out.append(Mode(s=s, alpha=alpha, beta=beta,
                        alpha_bar=alpha * shift, beta_bar=beta * shift))
    return replace(expansion, modes=tuple(out))
