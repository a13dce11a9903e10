"""Exception taxonomy shared across the simulator modules."""


class QbeatError(Exception):
    """Base class for all simulator-specific failures."""


class NonConvergence(QbeatError):
    """A Newton refinement did not converge within the iteration budget."""


class CountMismatch(QbeatError):
    """Certified pole count disagrees with the argument-principle count."""

    def __init__(self, found: int, counted: int, message: str = ""):
        self.found = found
        self.counted = counted
        detail = message or f"found {found} certified poles but contour counts {counted}"
        super().__init__(detail)


class BoundaryPole(QbeatError):
    """A zero of the inverse propagator sits (numerically) on the contour."""


class DegeneratePole(QbeatError):
    """Residue evaluation hit a (nearly) multiple root."""

    def __init__(self, s: complex):
        self.s = s
        super().__init__(f"derivative of inverse propagator vanishes at s = {s}")


class IncompleteExpansion(QbeatError):
    """A mode expansion without residues was used where residues are required."""


class GridMismatch(QbeatError):
    """Two traces were combined despite having different time grids."""


class StepTooCoarse(QbeatError):
    """Requested integrator step cannot resolve the fastest retained phase."""


class NormViolation(QbeatError):
    """Total excited-state population exceeded unity beyond tolerance."""


class NonDistinctSteps(QbeatError):
    """A convergence study needs strictly decreasing, distinct step sizes."""


class InsufficientHistory(QbeatError):
    """Field reconstruction requested amplitudes outside the stored trace."""


class MissingSeries(QbeatError):
    """A required input series (CSV) is absent."""

    def __init__(self, paths):
        self.paths = list(paths)
        super().__init__("missing input series: " + ", ".join(str(p) for p in self.paths))
