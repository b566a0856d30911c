"""Three-level loop-STIRAP simulator and generalized matched-pulse designer."""

from . import adiabatic, dynamics, errors, matched, pulses, scenarios
from .dynamics import StateVector, Trajectory, build_w, final_populations, propagate
from .pulses import PulseEnvelope, PulseSet

__all__ = [
    "adiabatic",
    "dynamics",
    "errors",
    "matched",
    "pulses",
    "scenarios",
    "PulseEnvelope",
    "PulseSet",
    "StateVector",
    "Trajectory",
    "build_w",
    "final_populations",
    "propagate",
]

__version__ = "0.1.0"
