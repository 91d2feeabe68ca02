"""Matrix elements <a|O|b> between hydrogen eigenstates.

Multiplicative operators are integrated directly. Momentum-bearing operators
go through exact operator identities (atomic units, H0 = p^2/2 - 1/r):

    <a|p_k|b>        = i (E_a - E_b) <a|x_k|b>
    {1/r, p_k}       = 2 (1/r) p_k + i x_k / r^3
    <a|p^2|b>        = 2 (E_b delta_ab + <a|1/r|b>)
    <a|p_k p^2|b>    = 2 E_b <a|p_k|b> + 2 (i <a|x_k/r^3|b> + <a|(1/r) p_k|b>)

Products x_j p_k and (1/r) p_k are evaluated by letting the analytic
gradient act on the ket inside the quadrature. The same gradient machinery
provides an independent direct route for p_k, p^2 and p_k p^2, used as an
oracle for the identities above.
"""

from __future__ import annotations

import csv
import io
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .basis import DomainError, QuantumNumbers, Superposition, energy
from .quadrature import (
    DEFAULT_QUADRATURE,
    GRAD_MINUS,
    GRAD_PLUS,
    GRAD_Z,
    INV_R_KERNEL,
    Kernel,
    QuadratureConfig,
    Terms,
    X_KERNEL,
    Y_KERNEL,
    Z_KERNEL,
    sandwich_integral,
)
from .units import DEFAULT_NMAX, HARD_NMAX


class OperatorKind(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"
    INV_R = "inv_r"
    X_OVER_R3 = "x_over_r3"
    Y_OVER_R3 = "y_over_r3"
    Z_OVER_R3 = "z_over_r3"
    PX = "px"
    PY = "py"
    PZ = "pz"
    INV_R_PX = "inv_r_px"
    INV_R_PY = "inv_r_py"
    INV_R_PZ = "inv_r_pz"
    SYM_INV_R_PX = "sym_inv_r_px"
    SYM_INV_R_PY = "sym_inv_r_py"
    SYM_INV_R_PZ = "sym_inv_r_pz"
    XPX = "x_px"
    XPY = "x_py"
    XPZ = "x_pz"
    ZPX = "z_px"
    ZPY = "z_py"
    ZPZ = "z_pz"
    P2 = "p2"
    PXP2 = "px_p2"
    PYP2 = "py_p2"
    PZP2 = "pz_p2"

    def __str__(self) -> str:
        return self.value


K = OperatorKind
AXES = ("x", "y", "z")

_POSITION = {"x": K.X, "y": K.Y, "z": K.Z}
_OVER_R3 = {"x": K.X_OVER_R3, "y": K.Y_OVER_R3, "z": K.Z_OVER_R3}
_MOMENTUM = {"x": K.PX, "y": K.PY, "z": K.PZ}
_INV_R_P = {"x": K.INV_R_PX, "y": K.INV_R_PY, "z": K.INV_R_PZ}
_SYM_INV_R_P = {"x": K.SYM_INV_R_PX, "y": K.SYM_INV_R_PY, "z": K.SYM_INV_R_PZ}
_P_P2 = {"x": K.PXP2, "y": K.PYP2, "z": K.PZP2}
_POS_MOM = {
    ("x", "x"): K.XPX, ("x", "y"): K.XPY, ("x", "z"): K.XPZ,
    ("z", "x"): K.ZPX, ("z", "y"): K.ZPY, ("z", "z"): K.ZPZ,
}


def position(axis: str) -> OperatorKind:
    return _POSITION[axis]


def momentum(axis: str) -> OperatorKind:
    return _MOMENTUM[axis]


def position_over_r3(axis: str) -> OperatorKind:
    return _OVER_R3[axis]


def inv_r_momentum(axis: str) -> OperatorKind:
    return _INV_R_P[axis]


def sym_inv_r_momentum(axis: str) -> OperatorKind:
    return _SYM_INV_R_P[axis]


def momentum_p2(axis: str) -> OperatorKind:
    return _P_P2[axis]


def position_momentum(pos_axis: str, mom_axis: str) -> OperatorKind:
    return _POS_MOM[(pos_axis, mom_axis)]


# ---------------------------------------------------------------------------
# Kernels

_VEC_DM = {"x": (-1, 1), "y": (-1, 1), "z": (0,)}

# p_k = -i d_k with d_x = (D+ + D-)/2, d_y = (D+ - D-)/(2i), d_z = D0
_P_GRAD = {
    "x": ((-0.5j, GRAD_PLUS), (-0.5j, GRAD_MINUS)),
    "y": ((-0.5, GRAD_PLUS), (0.5, GRAD_MINUS)),
    "z": ((-1j, GRAD_Z),),
}
# conj(p_k psi) = conj(-i d_k psi)
_P_GRAD_BRA = {
    "x": ((0.5j, GRAD_PLUS), (0.5j, GRAD_MINUS)),
    "y": ((-0.5, GRAD_PLUS), (0.5, GRAD_MINUS)),
    "z": ((1j, GRAD_Z),),
}
_POS_TERMS = {"x": X_KERNEL, "y": Y_KERNEL, "z": Z_KERNEL}


def _with(k: Kernel, **changes) -> Kernel:
    fields = dict(
        radial_power=k.radial_power, sin_power=k.sin_power, cos_power=k.cos_power,
        phi_harmonic=k.phi_harmonic, ket_gradient=k.ket_gradient, bra_gradient=k.bra_gradient,
    )
    fields.update(changes)
    return Kernel(**fields)


def _over_r3_terms(axis: str) -> Terms:
    return tuple((c, _with(k, radial_power=-2)) for c, k in _POS_TERMS[axis])


def _momentum_terms(axis: str, radial_power: int = 0) -> Terms:
    return tuple((c, Kernel(radial_power, ket_gradient=g)) for c, g in _P_GRAD[axis])


def _pos_mom_terms(pos: str, mom: str) -> Terms:
    return tuple(
        (c1 * c2, _with(k, ket_gradient=g))
        for c1, k in _POS_TERMS[pos]
        for c2, g in _P_GRAD[mom]
    )


def _gradient_overlap_terms() -> Terms:
    # grad(a)* . grad(b) = (conj(D+a) D+b + conj(D-a) D-b)/2 + conj(D0 a) D0 b
    return (
        (0.5, Kernel(bra_gradient=GRAD_PLUS, ket_gradient=GRAD_PLUS)),
        (0.5, Kernel(bra_gradient=GRAD_MINUS, ket_gradient=GRAD_MINUS)),
        (1.0, Kernel(bra_gradient=GRAD_Z, ket_gradient=GRAD_Z)),
    )


DIRECT_KERNELS: dict[OperatorKind, Terms] = {
    K.X: X_KERNEL,
    K.Y: Y_KERNEL,
    K.Z: Z_KERNEL,
    K.INV_R: INV_R_KERNEL,
    **{_OVER_R3[a]: _over_r3_terms(a) for a in AXES},
    **{_INV_R_P[a]: _momentum_terms(a, -1) for a in AXES},
    **{_POS_MOM[pm]: _pos_mom_terms(*pm) for pm in _POS_MOM},
}


@dataclass(frozen=True)
class KindInfo:
    delta_m: tuple[int, ...]  # allowed m_bra - m_ket
    rank: int
    parity: int  # 1 for odd operators (Delta l odd)
    hermitian: bool
    strategy: str  # "quadrature", "gradient" or "reduction"
    min_l_sum: int = 0  # triangle rule: l_bra + l_ket must reach the lowest rank present


def _vector(axis: str, hermitian: bool = True, strategy: str = "reduction") -> KindInfo:
    return KindInfo(_VEC_DM[axis], 1, 1, hermitian, strategy)


def _tensor(pos: str, mom: str) -> KindInfo:
    dm = tuple(sorted({a + b for a in _VEC_DM[pos] for b in _VEC_DM[mom]}))
    # x_j p_k with j != k has no scalar part, so s <-> s vanishes
    return KindInfo(dm, 2, 0, pos != mom, "gradient", 0 if pos == mom else 1)


KIND_INFO: dict[OperatorKind, KindInfo] = {
    **{_POSITION[a]: _vector(a, strategy="quadrature") for a in AXES},
    **{_OVER_R3[a]: _vector(a, strategy="quadrature") for a in AXES},
    **{_MOMENTUM[a]: _vector(a) for a in AXES},
    **{_INV_R_P[a]: _vector(a, hermitian=False, strategy="gradient") for a in AXES},
    **{_SYM_INV_R_P[a]: _vector(a) for a in AXES},
    **{_P_P2[a]: _vector(a) for a in AXES},
    **{_POS_MOM[pm]: _tensor(*pm) for pm in _POS_MOM},
    K.INV_R: KindInfo((0,), 0, 0, True, "quadrature"),
    K.P2: KindInfo((0,), 0, 0, True, "reduction"),
}


def allowed(a: QuantumNumbers, b: QuantumNumbers, kind: OperatorKind) -> bool:
    """Selection rule on (Delta l, Delta m) for ``<a|kind|b>``."""
    info = KIND_INFO[kind]
    dl = a.l - b.l
    if (a.m - b.m) not in info.delta_m:
        return False
    if abs(dl) > info.rank or (dl - info.parity) % 2:
        return False
    return a.l + b.l >= info.min_l_sum


# ---------------------------------------------------------------------------
# Element computation


class ElementTable:
    """Memo of matrix elements, safe for concurrent readers and writers.

    Hermitian kinds are stored once under the canonical (bra <= ket) key.
    Entries forbidden by selection rules are never stored.
    """

    def __init__(self, config: QuadratureConfig = DEFAULT_QUADRATURE, n_cap: int = DEFAULT_NMAX):
        if not 1 <= n_cap <= HARD_NMAX:
            raise DomainError(f"n cap must lie in [1, {HARD_NMAX}], got {n_cap}")
        self.config = config
        self.n_cap = n_cap
        self._values: dict[tuple[QuantumNumbers, QuantumNumbers, OperatorKind], complex] = {}
        self._provenance: dict[tuple[QuantumNumbers, QuantumNumbers, OperatorKind], str] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, key) -> bool:
        return key in self._values

    def provenance(self, a, b, kind) -> str | None:
        return self._provenance.get((a, b, kind))

    def get(self, a: QuantumNumbers, b: QuantumNumbers, kind: OperatorKind) -> complex:
        kind = OperatorKind(kind)
        if a.n > self.n_cap or b.n > self.n_cap:
            raise DomainError(f"state beyond the configured n cap {self.n_cap}: {a}, {b}")
        if not allowed(a, b, kind):
            return 0j
        if KIND_INFO[kind].hermitian and b < a:
            return self.get(b, a, kind).conjugate()
        key = (a, b, kind)
        val = self._values.get(key)
        if val is not None:
            return val
        val, how = self._compute(a, b, kind)
        with self._lock:
            val = self._values.setdefault(key, val)
            self._provenance.setdefault(key, how)
        return val

    def prefetch(self, requests: Iterable[tuple[QuantumNumbers, QuantumNumbers, OperatorKind]], workers: int = 1):
        """Fill the table for ``requests``; values do not depend on ``workers``."""
        requests = list(requests)
        if workers <= 1:
            for a, b, k in requests:
                self.get(a, b, k)
            return
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda req: self.get(*req), requests))

    def _compute(self, a, b, kind) -> tuple[complex, str]:
        if kind in DIRECT_KERNELS:
            return sandwich_integral(a, b, DIRECT_KERNELS[kind], self.config), KIND_INFO[kind].strategy
        if kind == K.P2:
            val = 2.0 * self.get(a, b, K.INV_R)
            if a == b:
                val += 2.0 * energy(b)
            return val, "reduction:p2=2(H0+1/r)"
        axis = _axis_of(kind)
        if kind in _MOMENTUM.values():
            de = energy(a) - energy(b)
            if de == 0.0:
                return 0j, "reduction:commutator"
            return 1j * de * self.get(a, b, _POSITION[axis]), "reduction:commutator"
        if kind in _SYM_INV_R_P.values():
            val = 2.0 * self.get(a, b, _INV_R_P[axis]) + 1j * self.get(a, b, _OVER_R3[axis])
            return val, "reduction:symmetrized"
        if kind in _P_P2.values():
            val = 2.0 * energy(b) * self.get(a, b, _MOMENTUM[axis]) + 2.0 * (
                1j * self.get(a, b, _OVER_R3[axis]) + self.get(a, b, _INV_R_P[axis])
            )
            return val, "reduction:p_p2"
        raise DomainError(f"unknown operator kind {kind!r}")

    def items(self):
        return sorted(self._values.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value))

    def to_csv(self) -> str:
        """Dump as CSV: bra n,l,m; ket n,l,m; kind; re; im; strategy."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bra_n", "bra_l", "bra_m", "ket_n", "ket_l", "ket_m", "kind", "re", "im", "strategy"])
        for (a, b, kind), v in self.items():
            w.writerow([a.n, a.l, a.m, b.n, b.l, b.m, kind.value,
                        format(v.real, ".17g"), format(v.imag, ".17g"),
                        self._provenance[(a, b, kind)]])
        return buf.getvalue()


def _axis_of(kind: OperatorKind) -> str:
    for table in (_MOMENTUM, _SYM_INV_R_P, _P_P2, _INV_R_P, _OVER_R3, _POSITION):
        for axis, k in table.items():
            if k == kind:
                return axis
    raise DomainError(f"{kind} has no single axis")


_DEFAULT_TABLE = ElementTable(n_cap=HARD_NMAX)


def element(a: QuantumNumbers, b: QuantumNumbers, kind: OperatorKind, table: ElementTable | None = None) -> complex:
    """<a|O|b> in atomic units (memoised)."""
    return (table or _DEFAULT_TABLE).get(a, b, OperatorKind(kind))


def direct_element(a: QuantumNumbers, b: QuantumNumbers, kind: OperatorKind,
                   config: QuadratureConfig = DEFAULT_QUADRATURE) -> complex:
    """<a|O|b> by gradient quadrature only, without operator identities.

    p_k uses the analytic gradient of the ket; p^2 uses grad(a)* . grad(b);
    p_k p^2 uses conj(p_k a) times p^2 b = 2 (E_b + 1/r) b evaluated pointwise.
    """
    kind = OperatorKind(kind)
    if not allowed(a, b, kind):
        return 0j
    if kind in DIRECT_KERNELS:
        return sandwich_integral(a, b, DIRECT_KERNELS[kind], config)
    if kind == K.P2:
        return sandwich_integral(a, b, _gradient_overlap_terms(), config)
    axis = _axis_of(kind)
    if kind in _MOMENTUM.values():
        return sandwich_integral(a, b, _momentum_terms(axis), config)
    if kind in _P_P2.values():
        eb = energy(b)
        terms = []
        for c, g in _P_GRAD_BRA[axis]:
            terms.append((2.0 * eb * c, Kernel(0, bra_gradient=g)))
            terms.append((2.0 * c, Kernel(-1, bra_gradient=g)))
        return sandwich_integral(a, b, terms, config)
    if kind in _SYM_INV_R_P.values():
        # (1/r) p + p (1/r) = (1/r) p + conj-side p acting on the bra times 1/r
        terms = list(_momentum_terms(axis, -1))
        terms += [(c, Kernel(-1, bra_gradient=g)) for c, g in _P_GRAD_BRA[axis]]
        return sandwich_integral(a, b, terms, config)
    raise DomainError(f"no direct route for {kind}")


ZERO_THRESHOLD = 1e-12


def verify_against_direct(a: QuantumNumbers, b: QuantumNumbers, kind: OperatorKind,
                          table: ElementTable | None = None):
    """(reduction value, direct value, relative gap) for a momentum-bearing kind."""
    kind = OperatorKind(kind)
    if KIND_INFO[kind].strategy != "reduction":
        raise DomainError(f"{kind} has no reduction route")
    table = table or _DEFAULT_TABLE
    red = table.get(a, b, kind)
    direct = direct_element(a, b, kind, table.config)
    # exact zeros from the commutator meet ~1e-17 quadrature noise: both count as zero
    scale = max(abs(red), abs(direct))
    gap = 0.0 if scale < ZERO_THRESHOLD else abs(red - direct) / scale
    return red, direct, gap


# ---------------------------------------------------------------------------
# Superposition sandwiches


def _csum(values) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def braket(bra: Superposition, kind: OperatorKind, ket: Superposition,
           table: ElementTable | None = None, workers: int = 1) -> complex:
    """<bra|O|ket> = sum conj(c_a) c_b <a|O|b>, correctly rounded sum."""
    table = table or _DEFAULT_TABLE
    kind = OperatorKind(kind)
    pairs = [(a, ca, b, cb) for a, ca in bra for b, cb in ket if allowed(a, b, kind)]
    if workers > 1:
        table.prefetch(((a, b, kind) for a, _, b, _ in pairs), workers)
    return _csum(ca.conjugate() * cb * table.get(a, b, kind) for a, ca, b, cb in pairs)


def expectation(state: Superposition, kind: OperatorKind, table: ElementTable | None = None,
                workers: int = 1) -> complex:
    return braket(state, kind, state, table, workers)
