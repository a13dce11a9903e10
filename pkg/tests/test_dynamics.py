"""Mode-sum reconstruction, closed forms, and state composition."""
import math

import numpy as np
import pytest

from qbeat import (
    ANTISYMMETRIC,
    SYMMETRIC,
    AmplitudeTrace,
    DdeConfig,
    GridMismatch,
    IncompleteExpansion,
    InitialState,
    SearchWindow,
    amplitudes_from_modes,
    canonical_params,
    closed_form_coincident,
    compose_general_state,
    cubic_interp,
    dde_integrate,
    find_poles,
    residues,
    single_atom_amplitudes,
    single_atom_reference,
    time_grid,
)
from qbeat.dde import _make_rhs

from conftest import LAMBDA_BEAT, STEP, cached_dde, cached_expansion

INV_SQRT2 = 1.0 / math.sqrt(2.0)


# -- time grid and interpolation -----------------------------------------


def test_time_grid_default_density():
    g = time_grid(1.0)
    assert g[0] == 0.0
    assert g.size == 2001
    assert np.allclose(np.diff(g), 5e-4)


def test_time_grid_contains_delay():
    tau = canonical_params(LAMBDA_BEAT).delay
    g = time_grid(2.0, 5e-4, delay=tau)
    k = int(round(tau / (g[1] - g[0])))
    assert abs(g[k] - tau) < 1e-12


def test_cubic_interp_reproduces_quadratics():
    tg = np.linspace(0.0, 2.0, 41)
    vals = 3.0 * tg ** 2 - 1.5 * tg + 0.25
    tq = np.linspace(0.013, 1.987, 97)
    got = cubic_interp(tg, vals, tq)
    want = 3.0 * tq ** 2 - 1.5 * tq + 0.25
    assert np.abs(got - want).max() < 1e-12


def test_cubic_interp_exact_at_nodes_and_clamped():
    tg = np.linspace(0.0, 1.0, 11)
    vals = np.sin(tg)
    assert np.abs(cubic_interp(tg, vals, tg) - vals).max() < 1e-15
    # queries may poke past the end by half a step, clamped to the endpoint
    assert cubic_interp(tg, vals, np.array([1.04]))[0] == pytest.approx(vals[-1])
    with pytest.raises(ValueError):
        cubic_interp(tg, vals, np.array([1.2]))


# -- trace container -----------------------------------------------------


def test_trace_arrays_read_only():
    tr = cached_dde(1.0, "sym", 2.0)
    with pytest.raises(ValueError):
        tr.ca2[0] = 0.0


def test_trace_shape_mismatch_rejected():
    t = np.linspace(0.0, 1.0, 5)
    z = np.zeros(5, dtype=complex)
    with pytest.raises(GridMismatch):
        AmplitudeTrace(times=t, ca2=z, ca3=z, cb2=z, cb3=np.zeros(4, dtype=complex),
                       provenance="dde")


def test_max_deviation_grid_check():
    a = cached_dde(1.0, "sym", 2.0)
    b = cached_dde(0.5, "sym", 2.0)   # different commensurate grid
    with pytest.raises(GridMismatch):
        a.max_deviation(b)


# -- closed forms --------------------------------------------------------


def test_coincident_closed_form_t0():
    p = canonical_params(0.0)
    cf = closed_form_coincident(p, SYMMETRIC, np.array([0.0]))
    want = INV_SQRT2 * (1.0 - p.gamma23 * p.gamma32 / p.omega23 ** 2)
    assert abs(cf.ca2[0] - want) < 1e-15
    assert abs(cf.ca3[0]) == 0.0


def test_coincident_closed_form_antisym_frozen():
    cf = closed_form_coincident(canonical_params(0.0), ANTISYMMETRIC,
                                time_grid(5.0, 1e-3))
    assert np.abs(cf.ca2 - INV_SQRT2).max() == 0.0
    assert np.abs(cf.ca3).max() == 0.0
    assert np.abs(cf.cb2 + INV_SQRT2).max() == 0.0


def test_coincident_closed_form_beat_structure():
    """Level-3 amplitude: envelope at the cross-rate scale, oscillation at
    the splitting frequency."""
    p = canonical_params(0.0)
    t = time_grid(2.0, 1e-4)
    cf = closed_form_coincident(p, SYMMETRIC, t)
    mag = np.abs(cf.ca3)
    assert 0.024 < mag.max() < 0.030    # ~ sqrt2 gamma / omega23
    # successive maxima of |c3| spaced by the beat period 2 pi / omega23
    peaks = [k for k in range(1, t.size - 1)
             if mag[k] > mag[k - 1] and mag[k] > mag[k + 1]]
    gaps = np.diff(t[peaks[:10]])
    assert np.allclose(gaps, 2.0 * math.pi / p.omega23, rtol=0.05)


def test_closed_form_satisfies_zero_delay_eom():
    """Substituting the closed form back into the zero-delay equations of
    motion leaves only the dropped frequency-shift terms: the residual is
    about 1% of the c3-channel derivative scale omega23*|c3|."""
    p = canonical_params(0.0)
    rhs = _make_rhs(p)
    rng = np.random.default_rng(7)
    h = 1e-5
    worst = 0.0
    for t in rng.uniform(0.05, 4.95, 100):
        tr = closed_form_coincident(p, SYMMETRIC, np.array([t - h, t, t + h]))
        y = (tr.ca2[1], tr.ca3[1], tr.cb2[1], tr.cb3[1])
        dnum = [(arr[2] - arr[0]) / (2.0 * h) for arr in tr.amplitude_components()]
        drhs = rhs(t, y, y)
        worst = max(worst, max(abs(a - b) for a, b in zip(dnum, drhs)))
    assert worst < 2e-2


def test_single_atom_reference_layout():
    tr = single_atom_reference(canonical_params(0.0), time_grid(1.0, 1e-3))
    assert abs(tr.ca2[0] - INV_SQRT2) < 1e-15
    assert np.abs(tr.cb2).max() == 0.0
    assert np.abs(tr.cb3).max() == 0.0


# -- mode-sum reconstruction ---------------------------------------------


def test_two_mode_reconstruction_is_exact():
    """At zero separation the expansion has just two modes and reproduces
    the delay integrator to solver precision."""
    p = canonical_params(0.0)
    exp = residues(find_poles(p, SYMMETRIC, SearchWindow(5.0, 100.0)))
    times = time_grid(5.0, STEP)
    ms = amplitudes_from_modes(exp, times)
    oracle = dde_integrate(p, InitialState.symmetric(),
                           DdeConfig(step=STEP, t_max=5.0))
    assert ms.max_deviation(oracle) < 1e-10


def test_trapped_sector_mode_sum():
    p = canonical_params(1e-9)
    exp = residues(find_poles(p, ANTISYMMETRIC, SearchWindow(5.0, 100.0)))
    ms = amplitudes_from_modes(exp, time_grid(5.0, 1e-3))
    assert np.abs(ms.ca2 - INV_SQRT2).max() < 1e-6
    assert np.abs(ms.ca3).max() < 1e-6


def test_mode_population_matches_closed_form_at_unit_time():
    p = canonical_params(0.0)
    exp = residues(find_poles(p, SYMMETRIC, SearchWindow(5.0, 100.0)))
    times = time_grid(2.0, STEP)
    ms = amplitudes_from_modes(exp, times)
    cf = closed_form_coincident(p, SYMMETRIC, times)
    i1 = int(round(1.0 / STEP))
    assert abs(abs(ms.ca2[i1]) ** 2 - abs(cf.ca2[i1]) ** 2) < 1e-4


def test_mode_sum_agrees_with_delay_integrator():
    exp = cached_expansion(1.0, "sym", "markovian")
    oracle = cached_dde(1.0, "sym", 2.0)
    ms = amplitudes_from_modes(exp, oracle.times)
    tau = exp.params.delay
    assert ms.max_deviation(oracle, t_min=tau) < 1e-3


def test_pre_transit_fallback_is_isolated_atom():
    exp = cached_expansion(1.0, "sym", "markovian")
    p = exp.params
    tg = time_grid(2.0, STEP, delay=p.delay)
    ms = amplitudes_from_modes(exp, tg)
    pre = tg < p.delay - 1e-12
    c2s, c3s = single_atom_amplitudes(p, tg[pre])
    assert np.abs(ms.ca2[pre] - c2s).max() == 0.0
    assert np.abs(ms.ca3[pre] - c3s).max() == 0.0
    # partner mirrors by construction
    assert np.abs(ms.cb2 - ms.ca2).max() == 0.0


def test_mode_trace_carries_defect_metadata():
    exp = cached_expansion(1.0, "sym", "markovian")
    ms = amplitudes_from_modes(exp, time_grid(1.0, 1e-3, delay=exp.params.delay))
    da, db = exp.residue_defects()
    assert ms.alpha_defect == da
    assert ms.beta_defect == db
    assert ms.provenance == "mode_sum"


def test_incomplete_expansion_rejected():
    p = canonical_params(0.0)
    bare = find_poles(p, SYMMETRIC, SearchWindow(5.0, 100.0))
    with pytest.raises(IncompleteExpansion):
        amplitudes_from_modes(bare, time_grid(1.0, 1e-3))


# -- composition ---------------------------------------------------------


def test_compose_recovers_sector_extremes():
    tp = cached_dde(1.0, "sym", 2.0)
    tm = cached_dde(1.0, "antisym", 2.0)
    sym = compose_general_state(InitialState.from_angles(math.pi / 4.0), tp, tm)
    assert sym.max_deviation(tp) < 1e-12
    anti = compose_general_state(InitialState.from_angles(math.pi / 4.0, math.pi),
                                 tp, tm)
    assert anti.max_deviation(tm) < 1e-12


def test_compose_is_linear_against_direct_run():
    """Composing the two delay-integrated sector runs reproduces a direct
    run of the composed initial state to roundoff."""
    p = canonical_params(LAMBDA_BEAT)
    cfg = DdeConfig(step=STEP, t_max=2.0)
    tp = cached_dde(1.0, "sym", 2.0)
    tm = cached_dde(1.0, "antisym", 2.0)
    comp = compose_general_state(InitialState.from_angles(0.0), tp, tm)
    direct = dde_integrate(p, InitialState.from_angles(0.0), cfg)
    assert comp.max_deviation(direct) < 1e-12


def test_compose_mode_traces_lone_atom():
    """theta=0: only atom A starts excited.  Composed mode-sum traces keep
    the far atom exactly dark before the transit and match the delay
    integrator within the fallback's accuracy."""
    exp_p = cached_expansion(1.0, "sym", "markovian")
    exp_m = cached_expansion(1.0, "antisym", "markovian")
    oracle = dde_integrate(canonical_params(LAMBDA_BEAT), InitialState.from_angles(0.0),
                           DdeConfig(step=STEP, t_max=2.0))
    tp = amplitudes_from_modes(exp_p, oracle.times)
    tm = amplitudes_from_modes(exp_m, oracle.times)
    comp = compose_general_state(InitialState.from_angles(0.0), tp, tm)
    tau = exp_p.params.delay
    pre = comp.times < tau - 1e-12
    assert np.abs(comp.cb2[pre]).max() == 0.0
    c2_full, _ = single_atom_amplitudes(exp_p.params, comp.times[pre], amplitude=1.0)
    assert np.abs(comp.ca2[pre] - c2_full).max() < 1e-12
    assert comp.max_deviation(oracle) < 1e-3


def test_compose_grid_mismatch():
    tp = cached_dde(1.0, "sym", 2.0)
    tm = cached_dde(0.5, "antisym", 2.0)
    with pytest.raises(GridMismatch):
        compose_general_state(InitialState.from_angles(0.0), tp, tm)


def test_compose_rejects_level3_components():
    tp = cached_dde(1.0, "sym", 2.0)
    tm = cached_dde(1.0, "antisym", 2.0)
    bad = InitialState(k2a=0j, k2b=0j, k3a=INV_SQRT2, k3b=INV_SQRT2)
    with pytest.raises(ValueError):
        compose_general_state(bad, tp, tm)
