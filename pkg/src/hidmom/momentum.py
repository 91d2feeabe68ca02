"""Hidden momentum estimators and the cross-method ratio.

Both estimators carry an overall 1/(2 c^2) in atomic units. The functions
below return the c-free numerators ``2 c^2 P`` so that every ratio can be
formed without touching c:

    method 1:  2c^2 P1_k  = <(p_k - v_k) p^2>
    method 2a: 2c^2 P2a_k = -E <{e.r, p_k - v_k}>
    method 2b: 2c^2 P2b_k = <{1/r, p_k - v_k}>

Here e is the field direction and v = <p>/m_e is the centre-of-mass velocity.
Reported momenta are given both in atomic units and in units of
mu_B E / c^2 = E / (2 c^2).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .basis import QuantumNumbers, Superposition
from .operators import (
    AXES,
    ElementTable,
    K,
    expectation,
    momentum_p2,
    position,
    position_momentum,
    sym_inv_r_momentum,
)
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig
from .stark import FieldConfig, center_of_mass_velocity, perturbed_state
from .units import BOHR_MAGNETON, DEFAULT_NMAX, SI_FACTORS, SPEED_OF_LIGHT

SCHEMA_VERSION = 1


def _re(z: complex) -> float:
    return z.real


def method1(state: Superposition, table: ElementTable, v_c=None, workers: int = 1) -> np.ndarray:
    """c-free numerators <(p_k - m_e v_k) p^2> for k = x, y, z."""
    v = center_of_mass_velocity(state, table, workers) if v_c is None else np.asarray(v_c, float)
    p2 = _re(expectation(state, K.P2, table, workers))
    return np.array([
        _re(expectation(state, momentum_p2(a), table, workers)) - v[i] * p2
        for i, a in enumerate(AXES)
    ])


def method2(state: Superposition, field: FieldConfig, table: ElementTable, v_c=None,
            workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """c-free numerators of the 2a and 2b terms, each as an (x, y, z) vector.

    The 2a part is returned divided by E (i.e. in units of mu_B E / c^2),
    the 2b part is the raw numerator. Use ``field.magnitude`` to rescale.
    """
    v = center_of_mass_velocity(state, table, workers) if v_c is None else np.asarray(v_c, float)
    cx, _, cz = field.direction
    e_dot_r = 0.0
    for c, a in ((cx, "x"), (cz, "z")):
        if c:
            e_dot_r += c * _re(expectation(state, position(a), table, workers))
    inv_r = _re(expectation(state, K.INV_R, table, workers))
    a_part, b_part = np.zeros(3), np.zeros(3)
    for i, k in enumerate(AXES):
        sym = 0.0
        for c, j in ((cx, "x"), (cz, "z")):
            if c:
                # {x_j, p_k} = 2 x_j p_k - i delta_jk, whose expectation is Re(2 <x_j p_k>)
                sym += c * _re(2.0 * expectation(state, position_momentum(j, k), table, workers))
        a_part[i] = -(sym - 2.0 * v[i] * e_dot_r)
        b_part[i] = _re(expectation(state, sym_inv_r_momentum(k), table, workers)) - 2.0 * v[i] * inv_r
    return a_part, b_part


def expected_ratio(qn: QuantumNumbers, field: FieldConfig) -> float | None:
    """-m for theta = 0, cos(theta) for the (3,1,-1) tilt sweep, else None."""
    if field.theta == 0.0:
        return float(-qn.m)
    if qn == QuantumNumbers(3, 1, -1):
        return float(-qn.m * field.direction[0])
    return None


@dataclass(frozen=True)
class DipoleMoment:
    """Magnetic moment in units of the Bohr magneton."""

    mu: tuple[float, float, float]

    @classmethod
    def of_state(cls, qn: QuantumNumbers) -> "DipoleMoment":
        return cls((0.0, 0.0, float(-qn.m)))


def classical_dipole_momentum(mu: DipoleMoment, field_vector, c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """mu x E / c^2 in atomic units."""
    mu_au = BOHR_MAGNETON * np.asarray(mu.mu, dtype=float)
    return np.cross(mu_au, np.asarray(field_vector, dtype=float)) / (c * c)


@dataclass
class HiddenMomentumReport:
    """Everything computed for one state and field.

    Momenta ending in ``_au`` are atomic units; the others are in units of
    mu_B E / c^2. ``ratio`` is (p1 - p2b) / (mu_B E / c^2).
    """

    n: int
    l: int
    m: int
    E: float
    theta: float
    n_max: int
    p1: float
    p2a: float
    p2b: float
    p2_total: float
    p1_au: float
    p2a_au: float
    p2b_au: float
    p2_total_au: float
    v_c: float
    v_c_over_E: float
    ratio: float | None
    expected_ratio: float | None
    residual: float | None
    method_residual: float | None
    classical_au: float
    components_xz: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def qn(self) -> QuantumNumbers:
        return QuantumNumbers(self.n, self.l, self.m)

    def to_dict(self) -> dict:
        return asdict(self)


def _reduce(numerator: float, E: float) -> float | None:
    return float(numerator / E) if E > 0 else None


def eq9_ratio(
    qn: QuantumNumbers,
    field: FieldConfig = FieldConfig(),
    n_max: int = DEFAULT_NMAX,
    table: ElementTable | None = None,
    config: QuadratureConfig = DEFAULT_QUADRATURE,
    c: float = SPEED_OF_LIGHT,
    workers: int = 1,
    state: Superposition | None = None,
) -> HiddenMomentumReport:
    """Perturb ``qn``, run both estimators and form (P1 - P2b) c^2 / (mu_B E).

    Args:
        qn: unperturbed state.
        field: external field (magnitude in atomic units, tilt in radians).
        n_max: largest shell kept in the perturbed state.
        table: shared element memo; created from ``config`` when omitted.
        config: quadrature margins (ignored when ``table`` is given).
        c: speed of light in atomic units; the ratio does not depend on it.
        workers: threads used to fill the element table.
        state: use this superposition instead of building the perturbed one.

    Returns:
        A ``HiddenMomentumReport``.

    Raises:
        LinearRegimeError: the field is too strong for first-order theory.
    """
    table = table or ElementTable(config, n_cap=max(n_max, DEFAULT_NMAX))
    if state is None:
        state = perturbed_state(qn, field, n_max, table, workers=workers)
    E = field.magnitude
    v = center_of_mass_velocity(state, table, workers)
    n1 = method1(state, table, v, workers)
    a_red, n2b = method2(state, field, table, v, workers)
    two_c2 = 2.0 * c * c
    unit = E / two_c2  # mu_B E / c^2 in atomic units

    ratio = _reduce(n1[1] - n2b[1], E)
    expect = expected_ratio(qn, field)
    residual = None if ratio is None or expect is None else ratio - expect
    p1, p2b = _reduce(n1[1], E), _reduce(n2b[1], E)
    p2a = float(a_red[1]) if E > 0 else None
    p2_total = None if p2b is None else p2a + p2b
    classical = classical_dipole_momentum(DipoleMoment.of_state(qn), field.vector, c)

    def xz(vec_reduced_or_num, reduced=False):
        out = {}
        for i, a in ((0, "x"), (2, "z")):
            val = vec_reduced_or_num[i]
            out[a] = float(val) if reduced else _reduce(float(val), E)
        return out

    components = {
        "method1": xz(n1),
        "method2a": xz(a_red, reduced=True) if E > 0 else {"x": None, "z": None},
        "method2b": xz(n2b),
        "v_c": {"x": float(v[0]), "z": float(v[2])},
    }
    meta = {
        "schema_version": SCHEMA_VERSION,
        "units": "atomic (hbar = m_e = e = a0 = 1); reduced momenta in mu_B E / c^2",
        "c": c,
        "mu_B": BOHR_MAGNETON,
        "quadrature": {"radial_margin": table.config.radial_margin,
                       "angular_extra": table.config.angular_extra},
        "terms": len(state),
        "max_abs_coefficient": state.metadata.get("max_abs_coefficient"),
        "excluded_degenerate_couplings": state.metadata.get("excluded_degenerate_couplings", []),
        "si_factors": dict(SI_FACTORS),
    }
    return HiddenMomentumReport(
        n=qn.n, l=qn.l, m=qn.m, E=E, theta=field.theta, n_max=n_max,
        p1=p1, p2a=p2a, p2b=p2b, p2_total=p2_total,
        p1_au=n1[1] / two_c2,
        p2a_au=(a_red[1] * unit) if E > 0 else 0.0,
        p2b_au=n2b[1] / two_c2,
        p2_total_au=((a_red[1] * unit) if E > 0 else 0.0) + n2b[1] / two_c2,
        v_c=float(v[1]),
        v_c_over_E=_reduce(float(v[1]), E),
        ratio=ratio,
        expected_ratio=expect,
        residual=residual,
        method_residual=None if p1 is None else p1 - p2_total,
        classical_au=float(classical[1]),
        components_xz=components,
        meta=meta,
    )
