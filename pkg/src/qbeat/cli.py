"""Command-line front end.

Subcommands: poles, dynamics, sweep, selftest.  Options can come from a flat
key=value config file (--config); explicit flags override it.  Exit codes:
0 success, 1 usage, 2 pole count mismatch, 3 degenerate pole, 4 backend
disagreement above tolerance, 5 I/O failure.
"""
from __future__ import annotations

import argparse
import cmath
import math
import sys
from pathlib import Path

import numpy as np

from . import csvio, scenarios
from .dde import DdeConfig, dde_integrate
from .dynamics import closed_form_coincident, single_atom_reference, time_grid
from .errors import CountMismatch, DegeneratePole, QbeatError
from .params import InitialState, canonical_params, derive_scales
from .scenarios import (BACKEND_DISAGREEMENT_TOL, merge_options, parse_config,
                        resolve_scenario, run_dynamics, run_sweep,
                        write_dynamics)
from .spectral import (ANTISYMMETRIC, SYMMETRIC, coincident_pole_pair,
                       find_poles, residues, window_preset)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COUNT_MISMATCH = 2
EXIT_DEGENERATE = 3
EXIT_DISAGREEMENT = 4
EXIT_IO = 5


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; remap onto this tool's contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser, *, window: bool = True) -> None:
    p.add_argument("--config", type=Path, help="flat key=value option file")
    p.add_argument("--name", help="scenario name (output subdirectory)")
    p.add_argument("--sector", choices=scenarios.SECTORS)
    p.add_argument("--theta", type=float,
                   help="initial-state mixing angle (overrides --sector)")
    p.add_argument("--phi", type=float, help="initial-state relative phase")
    p.add_argument("--distance", type=float)
    p.add_argument("--distance-unit", dest="distance_unit",
                   choices=("beat", "lam21", "coh"))
    p.add_argument("--tmax", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--out", help="output directory root")
    p.add_argument("--no-snap", dest="snap", action="store_const", const=False,
                   help="use the literal propagation phase instead of snapping "
                        "the carrier phase to an integer number of cycles")
    if window:
        p.add_argument("--window", choices=scenarios.WINDOWS)
        p.add_argument("--re-max", dest="re_max", type=float,
                       help="custom window half-width in decay rate")
        p.add_argument("--im-max", dest="im_max", type=float,
                       help="custom window half-height in frequency")


def build_parser() -> _Parser:
    ap = _Parser(prog="qbeat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True,
                            parser_class=_Parser)

    p = sub.add_parser("poles",
                       help="locate and certify waveguide-dressed modes")
    _add_common(p)

    p = sub.add_parser("dynamics",
                       help="time evolution via mode sum, delay integrator, or both")
    _add_common(p)
    p.add_argument("--backend", choices=scenarios.BACKENDS)
    p.add_argument("--intensity", action="store_const", const=True,
                   help="also write the detector intensity record")

    p = sub.add_parser("sweep",
                       help="scan a parameter axis and tabulate beat metrics")
    _add_common(p, window=False)
    p.add_argument("--axis", choices=scenarios.AXES)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--jobs", type=int)

    sub.add_parser("selftest",
                   help="quick internal consistency battery")
    return ap


def _options(args: argparse.Namespace) -> dict:
    config = parse_config(args.config) if getattr(args, "config", None) else None
    cli = {k: v for k, v in vars(args).items()
           if k not in ("command", "config")}
    return merge_options(config, cli)


# -- subcommand bodies --------------------------------------------------


def cmd_poles(args) -> int:
    opts = _options(args)
    scn = resolve_scenario(opts)
    sector = SYMMETRIC if opts["sector"] != "antisym" else ANTISYMMETRIC
    if opts["theta"] is not None:
        print("note: --theta ignored for pole search; use --sector", file=sys.stderr)
    expansion = residues(find_poles(scn.params, sector, scn.window))
    da, db = expansion.residue_defects()
    path = Path(opts["out"]) / scn.name / "poles.csv"
    csvio.write_poles_csv(path, expansion, extra={"scenario": scn.name})
    print(f"poles: {len(expansion.modes)} certified "
          f"(sector={sector.label}, re_max={scn.window.re_max:g}, "
          f"im_max={scn.window.im_max:g})")
    print(f"residue-sum defects: alpha={da:.3e} beta={db:.3e}")
    order = np.argsort(-np.abs(expansion.alpha_bars))[:6]
    for n in order:
        s = expansion.eigenvalues[n]
        print(f"  mode {n:4d}: s = {s.real:+.6g}{s.imag:+.6g}j  "
              f"|alpha_bar| = {abs(expansion.alpha_bars[n]):.4g}  "
              f"|beta_bar| = {abs(expansion.beta_bars[n]):.4g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_dynamics(args) -> int:
    opts = _options(args)
    res = run_dynamics(opts)
    written = write_dynamics(res, opts["out"])
    scn = res.scenario
    n = len(scn.times)
    print(f"dynamics: scenario={scn.name} backend={opts['backend']} "
          f"samples={n} tmax={float(opts['tmax']):g}")
    trace = res.primary_trace
    print(f"final populations: pop2A={trace.pop2a[-1]:.6g} "
          f"pop3A={trace.pop3a[-1]:.6g} total={trace.total_population[-1]:.6g}")
    for path in written:
        print(f"wrote {path}")
    dev = res.max_deviation
    if dev is not None:
        print(f"backend deviation: max |dc| = {dev:.3e}")
        if dev > BACKEND_DISAGREEMENT_TOL:
            print(f"error: backends disagree beyond {BACKEND_DISAGREEMENT_TOL:g}",
                  file=sys.stderr)
            return EXIT_DISAGREEMENT
    return EXIT_OK


def cmd_sweep(args) -> int:
    opts = _options(args)
    rows = run_sweep(opts)
    scn = resolve_scenario(opts, need_window=False)
    name = opts["name"] or f"sweep_{opts['axis']}"
    path = Path(opts["out"]) / name / "sweep.csv"
    csvio.write_sweep_csv(path, opts["axis"], scenarios.SWEEP_METRICS, rows,
                          scn.params, extra={"scenario": name})
    ok = sum(1 for _, metrics, _ in rows if metrics is not None)
    print(f"sweep: axis={opts['axis']} points={len(rows)} ok={ok}")
    for value, metrics, err in rows:
        if metrics is None:
            print(f"  {value:g}: failed ({err})")
        else:
            cells = " ".join(f"{k}={metrics[k]:.5g}" for k in scenarios.SWEEP_METRICS)
            print(f"  {value:g}: {cells}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    checks: list[tuple[str, bool, str]] = []

    def record(label, ok, detail=""):
        checks.append((label, ok, detail))
        print(f"selftest: {'PASS' if ok else 'FAIL'} {label}" +
              (f" ({detail})" if detail else ""))

    params = canonical_params(0.0)
    scales = derive_scales(params)
    record("canonical scales",
           math.isclose(scales.lambda_beat, 0.04 * math.pi, rel_tol=1e-12)
           and math.isclose(scales.lambda21, 2e-4 * math.pi, rel_tol=1e-12))

    for sector in (SYMMETRIC, ANTISYMMETRIC):
        sa, sb = coincident_pole_pair(params, sector)
        from .spectral import inverse_propagator
        resid = max(abs(inverse_propagator(sa, params, sector)),
                    abs(inverse_propagator(sb, params, sector)))
        record(f"coincident pole pair ({sector.label})", resid < 1e-9,
               f"max residual {resid:.1e}")

    near = canonical_params(1e-9)
    for sector in (SYMMETRIC, ANTISYMMETRIC):
        expansion = find_poles(near, sector, window_preset("markovian", near))
        want = coincident_pole_pair(near, sector)
        got = expansion.eigenvalues
        err = max(min(abs(g - w) for g in got) for w in want)
        record(f"near-coincident root find ({sector.label})", err < 1e-6,
               f"max pole shift {err:.1e}")

    times = time_grid(2.0, 5e-4)
    anti = dde_integrate(params, InitialState.antisymmetric(),
                         DdeConfig(step=5e-4, t_max=2.0))
    err = float(np.max(np.abs(anti.ca2 - 1.0 / math.sqrt(2.0))))
    record("dark-state freeze", err < 1e-9, f"max drift {err:.1e}")

    sym = dde_integrate(params, InitialState.symmetric(),
                        DdeConfig(step=5e-4, t_max=2.0))
    ref = closed_form_coincident(params, SYMMETRIC, sym.times)
    # populations, not amplitudes: the reference drops an O(gamma/omega23)
    # phase that cancels in |c|^2
    err = max(float(np.max(np.abs(np.abs(sym.ca2) ** 2 - np.abs(ref.ca2) ** 2))),
              float(np.max(np.abs(np.abs(sym.ca3) ** 2 - np.abs(ref.ca3) ** 2))))
    record("coincident bright decay", err < 2e-3, f"max deviation {err:.1e}")

    opts = merge_options(None, {"distance": 1.0, "distance_unit": "beat",
                                "sector": "sym", "backend": "both",
                                "tmax": 2.0, "dt": 5e-4})
    res = run_dynamics(opts)
    dev = res.max_deviation
    record("backend cross-check at one beat wavelength",
           dev is not None and dev < 1e-3, f"max deviation {dev:.1e}")

    failed = [label for label, ok, _ in checks if not ok]
    if failed:
        print(f"selftest: {len(failed)} of {len(checks)} checks failed",
              file=sys.stderr)
        return EXIT_DISAGREEMENT
    print(f"selftest: all {len(checks)} checks passed")
    return EXIT_OK


_COMMANDS = {"poles": cmd_poles, "dynamics": cmd_dynamics,
             "sweep": cmd_sweep, "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CountMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COUNT_MISMATCH
    except DegeneratePole as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except QbeatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISAGREEMENT


if __name__ == "__main__":
    sys.exit(main())
