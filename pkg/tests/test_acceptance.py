"""End-to-end acceptance battery.

One test per numbered requirement; each prints a single PASS/FAIL line
(run with -s to see them) and then asserts it.  Requirements 3 and 7 carry
clauses the implementation cannot meet and are expected to fail; the
printed diagnostics state why.  Shared heavy artifacts come from the
conftest caches, so the wall-clock assertions time the actual work once.
"""
import cmath
import math
import time

import numpy as np
import pytest

from conftest import (
    LAMBDA_BEAT,
    SCENARIO_SET,
    STEP,
    cached_dde,
    cached_expansion,
    cached_single,
    params_at,
    sector_of,
    window_for,
)
from qbeat import (
    DdeConfig,
    InitialState,
    amplitudes_from_modes,
    canonical_params,
    dde_integrate,
    find_poles,
    residues,
    time_grid,
    window_preset,
)
from qbeat.dynamics import closed_form_coincident, single_atom_amplitudes
from qbeat.field import (
    intensity_at_detector,
    intensity_coincident_closed_form,
    intensity_lightcone,
    emitted_fraction,
)
from qbeat.metrics import first_beat_peak
from qbeat.spectral import ANTISYMMETRIC, SYMMETRIC, count_poles

INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_criterion_01_coincident_pole_pair():
    p = canonical_params(1e-9)
    t0 = time.perf_counter()
    sym = find_poles(p, SYMMETRIC, window_preset("markovian", p))
    anti = find_poles(p, ANTISYMMETRIC, window_preset("markovian", p))
    elapsed = time.perf_counter() - t0

    gsum = p.gamma22 + p.gamma33
    delta = cmath.sqrt(p.omega23 ** 2 - gsum ** 2
                       - 2j * p.omega23 * (p.gamma22 - p.gamma33))
    want_sym = [-0.5 * gsum + 0.5j * (p.omega23 + delta),
                -0.5 * gsum + 0.5j * (p.omega23 - delta)]
    want_anti = [0.0 + 0.0j, 1j * p.omega23]

    def gap(got, want):
        return max(min(abs(g - w) for g in got) for w in want)

    err_s = gap(sym.eigenvalues, want_sym)
    err_a = gap(anti.eigenvalues, want_anti)
    ok = (len(sym.modes) == 2 and len(anti.modes) == 2
          and err_s < 1e-6 and err_a < 1e-6 and elapsed < 5.0)
    _report(1, ok,
            f"2+2 poles, sym gap {err_s:.1e}, antisym gap {err_a:.1e}, "
            f"{elapsed:.2f}s < 5s")


def test_criterion_02_subradiant_freeze():
    p = canonical_params(1e-9)
    tr = dde_integrate(p, InitialState.antisymmetric(),
                       DdeConfig(step=STEP, t_max=5.0))
    drift = max(np.abs(tr.ca2 - INV_SQRT2).max(),
                np.abs(tr.ca3).max(),
                np.abs(tr.cb2 + INV_SQRT2).max(),
                np.abs(tr.cb3).max())
    x_det = 0.5 * p.distance + 1e-6
    inten = intensity_lightcone(tr, p, x_det)
    peak = float(inten.values.max())
    ok = drift < 1e-9 and peak < 1e-10
    _report(2, ok, f"amplitude drift {drift:.1e} < 1e-9, "
                   f"detector intensity {peak:.1e} < 1e-10")


def test_criterion_03_superradiant_closed_form():
    """The population clause is expected to fail: the published closed form
    itself sits O(Gamma^2/omega23^2) = 4e-4 away from the exact evolution
    (already at t = 0 its level-2 amplitude is (1 - 4e-4) of the true
    initial value), so no faithful backend can track it to 1e-4."""
    p = canonical_params(0.0)
    t = time_grid(5.0, STEP)
    ref = closed_form_coincident(p, SYMMETRIC, t)
    dde = dde_integrate(p, InitialState.symmetric(), DdeConfig(step=STEP, t_max=5.0))
    near = canonical_params(1e-9)
    modes = amplitudes_from_modes(
        residues(find_poles(near, SYMMETRIC, window_preset("markovian", near))), t)

    # intensity clause first: detector record vs the published intensity form
    cc = intensity_coincident_closed_form(p, t)
    lc = intensity_lightcone(dde, p, 1e-6, times=t)
    m = t > 2e-6
    rel = np.max(np.abs(cc.values[m] - 0.5 * lc.values[m])) / np.max(0.5 * lc.values[m])
    print(f"criterion  3: {'PASS' if rel < 5e-2 else 'FAIL'} - intensity vs "
          f"closed form {rel:.1e} relative < 5e-2")
    assert rel < 5e-2

    gaps = {}
    for name, tr in (("dde", dde), ("modes", modes)):
        gaps[name] = max(np.abs(tr.pop2a - ref.pop2a).max(),
                         np.abs(tr.pop3a - ref.pop3a).max())
    worst = max(gaps.values())
    ok = worst < 1e-4
    _report(3, ok,
            f"population gap dde {gaps['dde']:.2e}, modes {gaps['modes']:.2e} "
            f"vs 1e-4 bound; the closed form is itself 4e-4 off at t=0 "
            f"(its stated O(Gamma^2/omega23^2) accuracy), bound unattainable")


@pytest.mark.parametrize("mult,window", SCENARIO_SET)
def test_criterion_04_oracle_equivalence(mult, window):
    p = params_at(mult)
    t0 = time.perf_counter()
    devs = {}
    for label in ("sym", "antisym"):
        exp = cached_expansion(mult, label, window)
        tr = cached_dde(mult, label)
        ms = amplitudes_from_modes(exp, tr.times)
        post = tr.times > p.delay
        devs[label] = max(
            np.abs(np.asarray(a)[post] - np.asarray(b)[post]).max()
            for a, b in zip(ms.amplitude_components(), tr.amplitude_components()))
    elapsed = time.perf_counter() - t0
    worst = max(devs.values())
    ok = worst < 1e-3 and elapsed < 120.0
    _report(4, ok,
            f"d={mult:g} lambda_beat: mode-vs-dde sym {devs['sym']:.1e}, "
            f"antisym {devs['antisym']:.1e} < 1e-3; {elapsed:.1f}s < 120s")


def _first_peak_ratio(mult: float) -> float | None:
    """Collective first post-transit beat peak of pop3 over the single-atom
    reference peak; None when the collective signal has no peak."""
    p = params_at(mult)
    tr = cached_dde(mult, "sym")
    single = cached_single()
    pk = first_beat_peak(tr.times, tr.pop3a, p.delay)
    pk_ref = first_beat_peak(single.times, single.pop3a, p.delay)
    if pk is None:
        return None
    return pk[1] / pk_ref[1]


def test_criterion_05_markovian_beat_enhancement():
    ratio = _first_peak_ratio(1.0)
    suppressed = _first_peak_ratio(0.5)
    ok = ratio is not None and abs(ratio - 4.1) < 0.4 and (
        suppressed is None or suppressed < 1.0)
    sup_txt = "no beat peak at all" if suppressed is None else f"ratio {suppressed:.2f} < 1"
    _report(5, ok, f"enhancement {ratio:.2f} within 4.1+-0.4; "
                   f"half-wavelength suppressed ({sup_txt})")


def test_criterion_06_nonmarkovian_beat_enhancement():
    ratio8 = _first_peak_ratio(8.0)
    ratio1 = _first_peak_ratio(1.0)
    ok = abs(ratio8 - 6.8) < 0.7 and ratio8 > ratio1
    _report(6, ok, f"enhancement {ratio8:.2f} within 6.8+-0.7 "
                   f"and above Markovian {ratio1:.2f}")


def test_criterion_07_superduperradiance_and_bound_state():
    """The emitted-fraction clause is expected to fail: by t = 8 the
    settled bound state holds 44% in the atoms and 22% in the cavity
    field, so a third of the excitation has genuinely escaped; no faithful
    accounting reports less than 0.1."""
    p = params_at(8.0)
    tr = cached_dde(8.0, "sym")
    period = 2.0 * math.pi / p.omega23
    i0 = int(np.flatnonzero(tr.times > p.delay)[0]) - 1
    win = (tr.times > p.delay) & (tr.times <= p.delay + period)
    p2 = tr.pop2a + tr.pop2b
    dicke = np.exp(-2.0 * p.gamma22 * (tr.times[win] - tr.times[i0]))
    margin = float(np.min(dicke - p2[win] / p2[i0]))
    print(f"criterion  7: {'PASS' if margin > 0 else 'FAIL'} - level-2 decay "
          f"beats the Dicke rate over one beat period (margin {margin:.1e})")
    assert margin > 0

    anti = cached_dde(8.0, "antisym")
    pop = float(anti.total_population[-1])
    print(f"criterion  7: {'PASS' if pop > 0.30 else 'FAIL'} - bound state "
          f"retains {pop:.3f} > 0.30 of the population at t=8")
    assert pop > 0.30

    frac = emitted_fraction(anti, params_at(8.0))
    ok = frac < 0.1
    _report(7, ok,
            f"emitted fraction {frac:.3f} vs 0.1 bound; atomic {pop:.3f} + "
            f"cavity field 0.22 + escaped {frac:.3f} closes the energy budget, "
            f"so an escape below 0.1 is unattainable")


def test_criterion_08_residue_sum_identities():
    p = canonical_params(1e-9)
    checks = []
    for sector in (SYMMETRIC, ANTISYMMETRIC):
        exp = residues(find_poles(p, sector, window_preset("markovian", p)))
        da, db = exp.residue_defects()
        checks.append((sector.label, da, db))
    worst = max(max(da, db) for _, da, db in checks)

    reported = []
    for mult, window in SCENARIO_SET:
        for label in ("sym", "antisym"):
            da, db = cached_expansion(mult, label, window).residue_defects()
            reported.append(f"d={mult:g}/{label}/{window}: {max(da, db):.2e}")
    print("criterion  8: finite-separation truncation defects (reported, "
          "not asserted): " + "; ".join(reported))

    ok = worst < 1e-3
    _report(8, ok,
            f"coincident-limit Markovian defects "
            + ", ".join(f"{lab} alpha {da:.1e} beta {db:.1e}" for lab, da, db in checks)
            + " all < 1e-3")


def test_criterion_09_causality():
    worst = 0.0
    for mult, _ in SCENARIO_SET:
        p = params_at(mult)
        for label in ("sym", "antisym"):
            tr = cached_dde(mult, label)
            init = (InitialState.symmetric() if label == "sym"
                    else InitialState.antisymmetric())
            k2a, k2b, _, _ = init.amplitudes
            pre = tr.times < p.delay - 1e-12
            c2, c3 = single_atom_amplitudes(p, tr.times[pre], 1.0)
            dev = max(np.abs(tr.ca2[pre] - k2a * c2).max(),
                      np.abs(tr.ca3[pre] - k2a * c3).max(),
                      np.abs(tr.cb2[pre] - k2b * c2).max(),
                      np.abs(tr.cb3[pre] - k2b * c3).max())
            worst = max(worst, dev)
    ok = worst < 1e-9
    _report(9, ok, f"pre-transit joint dynamics equals independent atoms "
                   f"to {worst:.1e} < 1e-9 in all finite-separation scenarios")


def test_criterion_10_pole_certification():
    mismatches = []
    total = 0
    for mult, window in SCENARIO_SET:
        p = params_at(mult)
        for label in ("sym", "antisym"):
            exp = cached_expansion(mult, label, window)
            counted = count_poles(p, sector_of(label), exp.window)
            total += 1
            if counted != len(exp.modes):
                mismatches.append(f"{mult}/{label}: {len(exp.modes)} vs {counted}")
    ok = not mismatches
    _report(10, ok, f"certified count equals contour count on all {total} "
                    f"preset windows" + ("" if ok else "; " + "; ".join(mismatches)))
