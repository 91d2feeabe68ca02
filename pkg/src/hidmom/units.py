"""Atomic units and SI conversion factors.

Everything inside the package is expressed in Hartree atomic units:
hbar = m_e = e = a_0 = e^2/(4 pi eps_0) = 1. The speed of light is the only
dimensionful constant that survives, c = 1/alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _sc

SPEED_OF_LIGHT = 137.035999
BOHR_MAGNETON = 0.5

DEFAULT_NMAX = 20
HARD_NMAX = 30


@dataclass(frozen=True)
class UnitSystem:
    """Atomic unit system. Only ``c`` may be changed (for cancellation checks)."""

    hbar: float = 1.0
    electron_mass: float = 1.0
    elementary_charge: float = 1.0
    bohr_radius: float = 1.0
    coulomb_constant: float = 1.0
    c: float = SPEED_OF_LIGHT

    @property
    def hartree(self) -> float:
        return self.coulomb_constant * self.elementary_charge**2 / self.bohr_radius

    @property
    def bohr_magneton(self) -> float:
        return self.elementary_charge * self.hbar / (2.0 * self.electron_mass)


ATOMIC = UnitSystem()


def _au(name: str) -> float:
    return float(_sc.physical_constants[name][0])


# SI value of one atomic unit of each quantity (CODATA via scipy).
SI_FACTORS = {
    "momentum_kg_m_per_s": _au("atomic unit of momentum"),
    "velocity_m_per_s": _au("atomic unit of velocity"),
    "length_m": _au("atomic unit of length"),
    "energy_J": _au("atomic unit of energy"),
    "electric_field_V_per_m": _au("atomic unit of electric field"),
    "time_s": _au("atomic unit of time"),
}
