"""First-order Stark perturbation of hydrogen bound states.

The perturbation is H' = E (x cos(theta) + z sin(theta)) (electron charge -e,
atomic units). Perturbed states keep the unperturbed state with unit weight
and add first-order admixtures from every other shell n' != n up to
``n_max``; couplings inside the degenerate shell are left out, which is the
correct t = 0 state for the n = 2 manifold (see ``evolution_components``).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .basis import DomainError, QuantumNumbers, Superposition, check_nmax, energy
from .operators import ElementTable, K, braket, expectation, momentum
from .units import DEFAULT_NMAX

LINEAR_GUARD = 0.05
DEFAULT_FIELD = 1e-8


class LinearRegimeError(ValueError):
    """Perturbative coefficients too large for first-order theory."""


class LinearRegimeWarning(UserWarning):
    pass


def _snap(v: float) -> float:
    # cos(pi/2) and sin(pi) come out ~1e-16; treat them as the exact zeros they are
    return 0.0 if abs(v) < 1e-15 else v


@dataclass(frozen=True)
class FieldConfig:
    """Uniform field E (x cos(theta) + z sin(theta)), magnitude in atomic units.

    ``magnitude = 0`` is accepted and means "no field".
    """

    magnitude: float = DEFAULT_FIELD
    theta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.magnitude) or self.magnitude < 0:
            raise DomainError(f"field magnitude must be >= 0, got {self.magnitude}")
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")

    @property
    def direction(self) -> tuple[float, float, float]:
        return (_snap(math.cos(self.theta)), 0.0, _snap(math.sin(self.theta)))

    @property
    def vector(self) -> np.ndarray:
        return self.magnitude * np.array(self.direction)


def _table_for(table: ElementTable | None, n_max: int) -> ElementTable:
    if table is None:
        return ElementTable(n_cap=max(n_max, DEFAULT_NMAX))
    return table


def perturbation_element(bra: QuantumNumbers, ket: QuantumNumbers, field: FieldConfig,
                         table: ElementTable) -> complex:
    """<bra|H'|ket>."""
    cx, _, cz = field.direction
    val = 0j
    if cx:
        val += cx * table.get(bra, ket, K.X)
    if cz:
        val += cz * table.get(bra, ket, K.Z)
    return field.magnitude * val


def _candidates(qn: QuantumNumbers, n_max: int, same_shell: bool = False):
    shells = [qn.n] if same_shell else [n for n in range(1, n_max + 1) if n != qn.n]
    for n2 in shells:
        for l2 in (qn.l - 1, qn.l + 1):
            if not 0 <= l2 < n2:
                continue
            for m2 in (qn.m - 1, qn.m, qn.m + 1):
                if -l2 <= m2 <= l2:
                    yield QuantumNumbers(n2, l2, m2)


def perturbed_state(
    qn: QuantumNumbers,
    field: FieldConfig,
    n_max: int = DEFAULT_NMAX,
    table: ElementTable | None = None,
    guard: str = "error",
    threshold: float = LINEAR_GUARD,
    workers: int = 1,
) -> Superposition:
    """|psi> = |qn> + sum_{n' != n} C |n'l'm'>, C = <n'l'm'|H'|qn> / (E_n - E_n').

    Args:
        qn: unperturbed state.
        field: external field.
        n_max: largest shell in the expansion (n_max >= qn.n).
        table: element memo to use; a private one is created if omitted.
        guard: "error" raises ``LinearRegimeError`` when max |C| > threshold,
            "warn" records the breach in the metadata, "off" skips the check.
        workers: threads used to fill the element table.

    Returns:
        A Superposition whose metadata echoes the field and truncation and
        lists same-shell couplings that were left out.
    """
    n_max = check_nmax(n_max)
    if n_max < qn.n:
        raise DomainError(f"n_max={n_max} below the state's n={qn.n}")
    table = _table_for(table, n_max)
    cx, _, cz = field.direction
    kinds = [k for k, c in ((K.X, cx), (K.Z, cz)) if c]
    cands = list(_candidates(qn, n_max))
    if workers > 1:
        table.prefetch(((c, qn, k) for c in cands for k in kinds), workers)
    e0 = energy(qn)
    terms = {qn: 1.0 + 0j}
    if field.magnitude > 0:
        for c in cands:
            h = perturbation_element(c, qn, field, table)
            if h != 0:
                terms[c] = h / (e0 - energy(c))
    excluded = []
    if field.magnitude > 0:
        for c in _candidates(qn, n_max, same_shell=True):
            if perturbation_element(c, qn, field, table) != 0:
                excluded.append([c.n, c.l, c.m])
    meta = {
        "state": [qn.n, qn.l, qn.m],
        "E": field.magnitude,
        "theta": field.theta,
        "n_max": n_max,
        "excluded_degenerate_couplings": excluded,
    }
    state = Superposition(terms, meta)
    biggest = state.max_abs_excluding(qn)
    meta["max_abs_coefficient"] = biggest
    if guard != "off" and biggest > threshold:
        msg = (f"max |C| = {biggest:.3g} exceeds the linear-regime guard {threshold} "
               f"for state {qn} at E = {field.magnitude:g}")
        if guard == "error":
            raise LinearRegimeError(msg)
        meta["guard_warning"] = msg
        warnings.warn(msg, LinearRegimeWarning, stacklevel=2)
    return state


# ---------------------------------------------------------------------------
# n = 2 degenerate manifold

N2_BASIS = (
    QuantumNumbers(2, 0, 0),
    QuantumNumbers(2, 1, -1),
    QuantumNumbers(2, 1, 0),
    QuantumNumbers(2, 1, 1),
)


@dataclass
class StarkEigensystem:
    shifts: list[float]
    vectors: list[Superposition]
    field: float
    basis: tuple[QuantumNumbers, ...] = N2_BASIS

    def __iter__(self):
        return iter(zip(self.shifts, self.vectors))

    def matrix(self) -> np.ndarray:
        """Eigenvectors as columns in ``basis`` order."""
        return np.array([[v[q] for v in self.vectors] for q in self.basis])


def _blocks(mat: np.ndarray) -> list[list[int]]:
    n = len(mat)
    seen, out = set(), []
    for i in range(n):
        if i in seen:
            continue
        stack, comp = [i], []
        seen.add(i)
        while stack:
            j = stack.pop()
            comp.append(j)
            for k in range(n):
                if k not in seen and mat[j, k] != 0:
                    seen.add(k)
                    stack.append(k)
        out.append(sorted(comp))
    return out


def stark_n2_eigensystem(magnitude: float = DEFAULT_FIELD, table: ElementTable | None = None) -> StarkEigensystem:
    """Diagonalise H' = E x inside the n = 2 shell.

    Uncoupled blocks are diagonalised separately so the degenerate zero
    eigenspace comes out as (|2,1,-1> + |2,1,1>)/sqrt(2) and |2,1,0>.
    Each vector is phased so that its last non-zero component (in the
    order 200, 21-1, 210, 211) is real positive.
    """
    table = table or ElementTable()
    mat = np.array([[table.get(a, b, K.X) for b in N2_BASIS] for a in N2_BASIS])
    if np.max(np.abs(mat.imag)) > 1e-14:
        raise DomainError("x is not real in the n=2 manifold; phase convention broken")
    mat = mat.real
    pairs = []
    for order, block in enumerate(_blocks(mat)):
        sub = mat[np.ix_(block, block)]
        vals, vecs = np.linalg.eigh(sub)
        for j, lam in enumerate(vals):
            full = np.zeros(len(N2_BASIS))
            full[block] = vecs[:, j]
            nz = np.flatnonzero(np.abs(full) > 1e-12)
            if full[nz[-1]] < 0:
                full = -full
            pairs.append((float(lam), order, full))
    pairs.sort(key=lambda p: (p[0], p[1]))
    shifts = [magnitude * lam for lam, _, _ in pairs]
    vectors = [
        Superposition({q: c for q, c in zip(N2_BASIS, vec) if c != 0.0})
        for _, _, vec in pairs
    ]
    return StarkEigensystem(shifts, vectors, magnitude)


def evolution_components(field: FieldConfig, n_max: int = DEFAULT_NMAX,
                         table: ElementTable | None = None, corrections: bool = True):
    """|psi_211(t)> = sum_j exp(i omega_j t) S_j with the global phase dropped.

    Each S_j = <eta_j|211> (eta_j + eta_j^(1)) with eta_j^(1) the first-order
    correction from shells n' != 2, and omega_j = -(first-order shift of eta_j).
    Returns a list of ``(omega_j, S_j)``.
    """
    if field.theta != 0.0:
        raise DomainError("the n=2 time evolution is defined for theta = 0")
    n_max = check_nmax(n_max)
    table = _table_for(table, n_max)
    system = stark_n2_eigensystem(field.magnitude, table)
    target = QuantumNumbers(2, 1, 1)
    corr = {}
    if corrections:
        for q in N2_BASIS:
            full = perturbed_state(q, field, n_max, table, guard="off")
            corr[q] = Superposition({k: c for k, c in full if k != q})
    out = []
    for shift, eta in system:
        weight = eta[target].conjugate()
        if weight == 0:
            continue
        parts = [(1.0, eta)]
        if corrections:
            parts += [(c, corr[q]) for q, c in eta]
        comp = Superposition.linear(parts).scaled(weight)
        out.append((-shift, comp))
    return out


def evolve_211(t: float, field: FieldConfig, n_max: int = DEFAULT_NMAX,
               table: ElementTable | None = None, corrections: bool = True) -> Superposition:
    """The perturbed |2,1,1> state at time t (global phase omitted)."""
    comps = evolution_components(field, n_max, table, corrections)
    state = Superposition.linear([(cmath.exp(1j * w * t), s) for w, s in comps])
    state.metadata.update({"t": t, "E": field.magnitude, "theta": field.theta, "n_max": n_max})
    return state


def time_expectation(components, kind, t: float, table: ElementTable, derivative: bool = False) -> complex:
    """<O>(t), or d<O>/dt when ``derivative`` is set, from phase components."""
    vals = []
    for wj, sj in components:
        for wk, sk in components:
            dw = wk - wj
            v = cmath.exp(1j * dw * t) * braket(sj, kind, sk, table)
            vals.append(1j * dw * v if derivative else v)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def expectation_spectrum(components, kind, table: ElementTable) -> dict[float, complex]:
    """Fourier amplitudes A_w with <O>(t) = sum_w A_w exp(i w t).

    Frequencies equal up to 1e-9 relative are merged.
    """
    acc: dict[float, list[complex]] = {}
    keys: list[float] = []
    for wj, sj in components:
        for wk, sk in components:
            dw = wk - wj
            v = braket(sj, kind, sk, table)
            if v == 0:
                continue
            for key in keys:
                if abs(key - dw) <= 1e-9 * max(abs(key), abs(dw)) or key == dw:
                    acc[key].append(v)
                    break
            else:
                keys.append(dw)
                acc[dw] = [v]
    return {
        k: complex(math.fsum(v.real for v in acc[k]), math.fsum(v.imag for v in acc[k]))
        for k in sorted(acc)
    }


def center_of_mass_velocity(state: Superposition, table: ElementTable | None = None,
                            workers: int = 1) -> np.ndarray:
    """(<p_x>, <p_y>, <p_z>)/m_e for a state normalised to first order."""
    table = table or ElementTable(n_cap=max([DEFAULT_NMAX] + [q.n for q in state.keys()]))
    return np.array([expectation(state, momentum(a), table, workers).real for a in ("x", "y", "z")])
