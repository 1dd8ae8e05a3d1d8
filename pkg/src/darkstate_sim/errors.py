"""Exception types shared across the simulation modules."""


class SimulationError(Exception):
    """Base class for domain errors raised by this package."""


class DegenerateCouplingError(SimulationError):
    """Both couplings vanish, so no dark state exists (g_a = g_b = 0)."""


class NegativeTimeError(SimulationError):
    """A propagation time was negative; conditional evolution runs forward only."""


class InvalidUniformError(SimulationError):
    """A uniform variate fell outside the domain expected by inverse sampling."""


class ZeroRateError(SimulationError):
    """A jump was requested from a state with zero total emission rate."""


class EmptyGridError(SimulationError):
    """An ensemble was requested on an empty time grid."""
