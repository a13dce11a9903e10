"""System parameters, unit conventions, and derived scales.

Canonical units: the level-2 decay rate gamma22 sets the unit of rate and
frequency, the guided-mode speed sets the unit of velocity, so distances are
measured in units of velocity/gamma22 (one coherence length).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

#: Default detuning between the two excited levels, in units of gamma22.
CANONICAL_OMEGA23 = 50.0
#: Default frequency of the 2->1 transition, in units of gamma22.
CANONICAL_OMEGA21 = 1.0e4

_CS_SLACK = 1.0 + 1e-12  # Cauchy-Schwarz bound on the cross rates, FP slack


@dataclass(frozen=True)
class SystemParams:
    """Rates, frequencies, and geometry of the two-emitter system.

    gamma22, gamma33 are the direct decay rates of the two excited levels into
    the guide; gamma23, gamma32 are the cross-level rates (default: the
    parallel-dipole value sqrt(gamma22*gamma33), the largest allowed).
    omega23 is the excited-state splitting, omega21 the frequency of the
    2 -> 1 transition, distance the emitter separation, velocity the guided
    mode speed.

    phi2 optionally overrides the propagation phase omega21*distance/velocity
    (radians, not reduced).  The standard numerical setup places the emitters
    an integer number of resonant wavelengths apart, which makes the phase an
    exact multiple of 2*pi while every delay term keeps the literal distance;
    phi2=0.0 expresses that choice without rounding the distance itself.
    """

    gamma22: float = 1.0
    gamma33: float = 1.0
    gamma23: float | None = None
    gamma32: float | None = None
    omega23: float = CANONICAL_OMEGA23
    omega21: float = CANONICAL_OMEGA21
    distance: float = 0.0
    velocity: float = 1.0
    phi2: float | None = None

    def __post_init__(self):
        if self.gamma23 is None:
            object.__setattr__(self, "gamma23", math.sqrt(self.gamma22 * self.gamma33))
        if self.gamma32 is None:
            object.__setattr__(self, "gamma32", math.sqrt(self.gamma22 * self.gamma33))
        if self.gamma22 <= 0 or self.gamma33 <= 0:
            raise ValueError("direct decay rates must be strictly positive")
        if self.gamma23 < 0 or self.gamma32 < 0:
            raise ValueError("cross rates must be non-negative")
        if self.gamma23 * self.gamma32 > _CS_SLACK * self.gamma22 * self.gamma33:
            raise ValueError("cross rates violate gamma23*gamma32 <= gamma22*gamma33")
        # omega23 may be negative: the level-3 substitution flips its sign.
        if self.omega23 == 0.0:
            raise ValueError("excited-state splitting must be nonzero")
        if self.omega21 <= abs(self.omega23):
            raise ValueError("omega21 must exceed the excited-state splitting")
        if self.distance < 0:
            raise ValueError("distance must be non-negative")
        if self.velocity <= 0:
            raise ValueError("velocity must be strictly positive")

    # -- geometry-derived quantities ------------------------------------

    @property
    def delay(self) -> float:
        """One-way propagation time between the emitters."""
        return self.distance / self.velocity

    @property
    def phi2_effective(self) -> float:
        """Propagation phase of the 2->1 transition (override-aware)."""
        if self.phi2 is not None:
            return self.phi2
        return self.omega21 * self.delay

    @property
    def phi3_effective(self) -> float:
        """Propagation phase of the 3->1 transition: phi2 - omega23*d/v."""
        return self.phi2_effective - self.omega23 * self.delay

    @property
    def phase2(self) -> complex:
        return cmath.exp(1j * self.phi2_effective)

    @property
    def phase3(self) -> complex:
        return cmath.exp(1j * self.phi3_effective)


@dataclass(frozen=True)
class DerivedScales:
    """Length and phase scales implied by a parameter set.

    Phases are the literal products omega_j1 * d / v (no reduction); use
    phases_mod_2pi for the reduced values.
    """

    lambda_beat: float
    lambda21: float
    coherence_length: float
    phi2: float
    phi3: float

    def phases_mod_2pi(self) -> tuple[float, float]:
        return (self.phi2 % TWO_PI, self.phi3 % TWO_PI)


def derive_scales(params: SystemParams) -> DerivedScales:
    """Compute the beat wavelength, resonant wavelength, coherence length,
    and raw propagation phases for a parameter set.  Pure: equal inputs give
    bitwise-equal outputs."""
    v = params.velocity
    lambda_beat = TWO_PI * v / abs(params.omega23)
    lambda21 = TWO_PI * v / params.omega21
    coherence_length = v / params.gamma22
    tau = params.distance / v
    phi2 = params.omega21 * tau
    phi3 = phi2 - params.omega23 * tau
    return DerivedScales(lambda_beat, lambda21, coherence_length, phi2, phi3)


def canonical_params(distance: float = 0.0, *, snap_phase: bool = True,
                     **overrides) -> SystemParams:
    """Reference parameter set: gamma22 = gamma33 = 1, parallel dipoles,
    omega23 = 50, omega21 = 1e4, unit velocity.

    snap_phase=True applies the integer-wavelength separation convention
    (propagation phase identically zero mod 2*pi) unless the caller supplies
    an explicit phi2.
    """
    fields = dict(gamma22=1.0, gamma33=1.0, omega23=CANONICAL_OMEGA23,
                  omega21=CANONICAL_OMEGA21, distance=distance, velocity=1.0)
    if snap_phase and "phi2" not in overrides:
        fields["phi2"] = 0.0
    fields.update(overrides)
    return SystemParams(**fields)


DISTANCE_UNITS = ("beat", "lam21", "coh")


def distance_in_units(value: float, unit: str, params: SystemParams) -> float:
    """Convert a distance given in named units to canonical length."""
    scales = derive_scales(params)
    if unit == "beat":
        return value * scales.lambda_beat
    if unit == "lam21":
        return value * scales.lambda21
    if unit == "coh":
        return value * scales.coherence_length
    raise ValueError(f"unknown distance unit {unit!r} (expected one of {DISTANCE_UNITS})")


def snap_to_lambda21(distance: float, params: SystemParams) -> float:
    """Round a distance to the nearest integer multiple of the resonant
    wavelength lambda21."""
    lam = derive_scales(params).lambda21
    return round(distance / lam) * lam


_NORM_TOL = 1e-12
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class InitialState:
    """Single-excitation initial state K2A|2A> + K2B|2B> + K3A|3A> + K3B|3B>.

    theta/phi are retained when the state was built from the one-parameter
    family (cos(theta), e^{i phi} sin(theta), 0, 0).
    """

    k2a: complex
    k2b: complex
    k3a: complex = 0j
    k3b: complex = 0j
    theta: float | None = None
    phi: float | None = None

    def __post_init__(self):
        norm = (abs(self.k2a) ** 2 + abs(self.k2b) ** 2
                + abs(self.k3a) ** 2 + abs(self.k3b) ** 2)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"initial state norm deviates from 1 by {abs(norm - 1.0):.3e}")

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "InitialState":
        return cls(k2a=complex(math.cos(theta)),
                   k2b=cmath.exp(1j * phi) * math.sin(theta),
                   theta=theta, phi=phi)

    @classmethod
    def symmetric(cls) -> "InitialState":
        return cls(k2a=_INV_SQRT2 + 0j, k2b=_INV_SQRT2 + 0j)

    @classmethod
    def antisymmetric(cls) -> "InitialState":
        return cls(k2a=_INV_SQRT2 + 0j, k2b=-_INV_SQRT2 + 0j)

    @property
    def amplitudes(self) -> tuple[complex, complex, complex, complex]:
        return (self.k2a, self.k2b, self.k3a, self.k3b)

    @property
    def in_level2_manifold(self) -> bool:
        return self.k3a == 0 and self.k3b == 0

    @property
    def sector_weights(self) -> tuple[complex, complex]:
        """Weights (w+, w-) of the symmetric/antisymmetric level-2 states."""
        if not self.in_level2_manifold:
            raise ValueError("sector decomposition defined on the level-2 manifold only")
        return ((self.k2a + self.k2b) * _INV_SQRT2,
                (self.k2a - self.k2b) * _INV_SQRT2)
