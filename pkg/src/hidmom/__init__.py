"""Hidden momentum of a hydrogen atom in a uniform electric field.

Two independent estimators are computed from first-order Stark-perturbed
bound states: the relativistic momentum expectation in the centre-of-mass
frame, and the quantum analogue of ``-(1/c^2) * integral(Phi J)``.
"""

__version__ = "0.1.0"

from .basis import QuantumNumbers, Superposition, energy
from .momentum import HiddenMomentumReport, eq9_ratio
from .stark import FieldConfig, perturbed_state

__all__ = [
    "__version__",
    "QuantumNumbers",
    "Superposition",
    "energy",
    "FieldConfig",
    "perturbed_state",
    "HiddenMomentumReport",
    "eq9_ratio",
]
