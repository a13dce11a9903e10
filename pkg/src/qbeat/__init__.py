"""Collective quantum beats of two waveguide-coupled three-level emitters.

Two V-type atoms sit on a 1D waveguide a distance d apart.  The package
solves the single-excitation dynamics two independent ways: a spectral
expansion over the zeros of the dressed inverse propagator, and a direct
delay-differential integrator that keeps the retarded field explicit.
"""
from .dde import DdeConfig, convergence_study, dde_integrate
from .dynamics import (AmplitudeTrace, amplitudes_from_modes,
                       closed_form_coincident, compose_general_state,
                       cubic_interp, level3_substitution,
                       single_atom_amplitudes, single_atom_reference,
                       time_grid)
from .errors import (BoundaryPole, CountMismatch, DegeneratePole,
                     GridMismatch, IncompleteExpansion, InsufficientHistory,
                     MissingSeries, NonConvergence, NonDistinctSteps,
                     NormViolation, QbeatError, StepTooCoarse)
from .field import (IntensityTrace, emitted_fraction,
                    intensity_at_detector, intensity_coincident_closed_form,
                    intensity_lightcone)
from .metrics import beat_modulation, beat_visibility, first_beat_peak
from .params import (DerivedScales, InitialState, SystemParams,
                     canonical_params, derive_scales, distance_in_units,
                     snap_to_lambda21)
from .spectral import (ANTISYMMETRIC, SYMMETRIC, Mode, ModeExpansion,
                       SearchWindow, SymmetrySector, coincident_pole_pair,
                       count_poles, find_poles, inverse_propagator,
                       inverse_propagator_deriv, newton_refine, residues,
                       sector_from_label, window_preset)

__version__ = "0.1.0"

__all__ = [
    "ANTISYMMETRIC", "AmplitudeTrace", "BoundaryPole", "CountMismatch",
    "DdeConfig", "DegeneratePole", "DerivedScales", "GridMismatch",
    "IncompleteExpansion", "InitialState", "InsufficientHistory",
    "IntensityTrace", "MissingSeries", "Mode", "ModeExpansion",
    "NonConvergence", "NonDistinctSteps", "NormViolation", "QbeatError",
    "SYMMETRIC", "SearchWindow", "StepTooCoarse", "SymmetrySector",
    "SystemParams", "amplitudes_from_modes", "beat_modulation",
    "beat_visibility",
    "canonical_params", "closed_form_coincident", "coincident_pole_pair",
    "compose_general_state", "convergence_study", "count_poles",
    "cubic_interp", "dde_integrate", "derive_scales", "distance_in_units",
    "emitted_fraction", "find_poles", "first_beat_peak",
    "intensity_at_detector", "intensity_coincident_closed_form",
    "intensity_lightcone", "inverse_propagator", "inverse_propagator_deriv",
    "level3_substitution", "newton_refine", "residues", "sector_from_label",
    "single_atom_amplitudes", "single_atom_reference", "snap_to_lambda21",
    "time_grid", "window_preset",
]
