"""Hydrogen bound states in atomic units.

Wavefunctions are psi_{nlm}(r, theta, phi) = R_{nl}(r) Y_{lm}(theta, phi) with
the Condon-Shortley phase, so that

    Y_{l,-m} = (-1)^m conj(Y_{lm}),   Y_{1,1} = -sqrt(3/8pi) sin(theta) e^{i phi}.

The signs of every dipole element, of the centre-of-mass velocity and of the
hidden momentum follow from this convention.

Radial functions are evaluated as ``P(r) * exp(-r/n)`` where ``P`` is a
polynomial (normalisation times rho^l L^{2l+1}_{n-l-1}(rho), rho = 2r/n).
Quadrature routines work with ``P`` directly and let the Gauss-Laguerre
weight carry the exponential envelope.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .units import HARD_NMAX


class DomainError(ValueError):
    """Invalid quantum numbers or evaluation point."""


@dataclass(frozen=True, order=True)
class QuantumNumbers:
    """Bound-state label (n, l, m) with 0 <= l < n and |m| <= l."""

    n: int
    l: int
    m: int

    def __post_init__(self):
        for name in ("n", "l", "m"):
            if not isinstance(getattr(self, name), (int, np.integer)) or isinstance(
                getattr(self, name), bool
            ):
                raise DomainError(f"{name} must be an integer, got {getattr(self, name)!r}")
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        if not 0 <= self.l <= self.n - 1:
            raise DomainError(f"l must satisfy 0 <= l <= n-1, got (n, l) = ({self.n}, {self.l})")
        if not -self.l <= self.m <= self.l:
            raise DomainError(f"m must satisfy |m| <= l, got (l, m) = ({self.l}, {self.m})")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "m", int(self.m))

    @classmethod
    def parse(cls, text: str) -> "QuantumNumbers":
        """Parse ``"n,l,m"``."""
        parts = [p.strip() for p in text.replace("{", "").replace("}", "").split(",")]
        if len(parts) != 3:
            raise DomainError(f"expected 'n,l,m', got {text!r}")
        try:
            n, l, m = (int(p) for p in parts)
        except ValueError as exc:
            raise DomainError(f"expected integers in 'n,l,m', got {text!r}") from exc
        return cls(n, l, m)

    def __str__(self) -> str:
        return f"({self.n},{self.l},{self.m})"


def energy(qn: QuantumNumbers | int) -> float:
    """Bohr energy -1/(2 n^2) in hartree."""
    n = qn.n if isinstance(qn, QuantumNumbers) else qn
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    return -0.5 / (n * n)


@dataclass(frozen=True)
class BasisState:
    qn: QuantumNumbers

    @property
    def energy(self) -> float:
        return energy(self.qn)


def states_up_to(n_max: int) -> list[QuantumNumbers]:
    """All bound states with n <= n_max in (n, l, m) order."""
    return [
        QuantumNumbers(n, l, m)
        for n in range(1, n_max + 1)
        for l in range(n)
        for m in range(-l, l + 1)
    ]


def check_nmax(n_max: int, cap: int = HARD_NMAX) -> int:
    if n_max < 1 or n_max > cap:
        raise DomainError(f"n_max must lie in [1, {cap}], got {n_max}")
    return int(n_max)


# ---------------------------------------------------------------------------
# Radial part


def genlaguerre(k: int, alpha: int, x):
    """Generalised Laguerre polynomial L_k^alpha(x) by upward recurrence."""
    x = np.asarray(x, dtype=float)
    if k < 0:
        return np.zeros_like(x)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = 1.0 + alpha - x
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


def _radial_norm(n: int, l: int) -> float:
    # (2/n)^{3/2} sqrt((n-l-1)! / (2n (n+l)!)), via lgamma to stay finite at n=30
    log_norm = 1.5 * math.log(2.0 / n) + 0.5 * (
        math.lgamma(n - l) - math.lgamma(n + l + 1) - math.log(2.0 * n)
    )
    return math.exp(log_norm)


def radial_polynomial(n: int, l: int, r, order: int = 0):
    """Polynomial factor P of R_{nl}(r) = P(r) exp(-r/n) and its r-derivatives.

    Returns a tuple ``(P, P', ..., P^(order))`` with ``order <= 2``.
    Derivatives use d/dx L_k^a = -L_{k-1}^{a+1}.
    """
    if not 0 <= l < n:
        raise DomainError(f"invalid (n, l) = ({n}, {l})")
    r = np.asarray(r, dtype=float)
    k, a = n - l - 1, 2 * l + 1
    s = 2.0 / n
    rho = s * r
    norm = _radial_norm(n, l)
    lag = genlaguerre(k, a, rho)
    out = [norm * rho**l * lag]
    if order >= 1:
        dlag = -genlaguerre(k - 1, a + 1, rho)
        d_rho = rho**l * dlag
        if l >= 1:
            d_rho = d_rho + l * rho ** (l - 1) * lag
        out.append(norm * s * d_rho)
    if order >= 2:
        d2lag = genlaguerre(k - 2, a + 2, rho)
        d2_rho = rho**l * d2lag
        if l >= 1:
            d2_rho = d2_rho + 2 * l * rho ** (l - 1) * dlag
        if l >= 2:
            d2_rho = d2_rho + l * (l - 1) * rho ** (l - 2) * lag
        out.append(norm * s * s * d2_rho)
    return tuple(out)


def radial_polynomial_over_r(n: int, l: int, r):
    """P(r)/r, finite at r = 0 for l >= 1; zero for l = 0 is NOT implied."""
    r = np.asarray(r, dtype=float)
    if l == 0:
        return radial_polynomial(n, l, r)[0] / r
    k, a = n - l - 1, 2 * l + 1
    s = 2.0 / n
    rho = s * r
    return _radial_norm(n, l) * s * rho ** (l - 1) * genlaguerre(k, a, rho)


def radial_wavefunction(n: int, l: int, r):
    """Normalised hydrogen radial function R_{nl}(r), in a_0^{-3/2}.

    Args:
        n: principal quantum number.
        l: orbital quantum number, 0 <= l < n.
        r: radius (scalar or array), r >= 0.

    Returns:
        R_{nl}(r) with the integral of R^2 r^2 over [0, inf) equal to one.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    (p,) = radial_polynomial(n, l, r)
    return p * np.exp(-r / n)


def radial_derivatives(n: int, l: int, r):
    """(R, dR/dr, d^2R/dr^2) evaluated analytically."""
    r = np.asarray(r, dtype=float)
    p, dp, d2p = radial_polynomial(n, l, r, order=2)
    env = np.exp(-r / n)
    return p * env, (dp - p / n) * env, (d2p - 2.0 * dp / n + p / (n * n)) * env


# ---------------------------------------------------------------------------
# Angular part


def _legendre_column(l: int, m_abs: int, u, s, strip: bool):
    """Normalised theta-factor of Y_{l,|m|} (Condon-Shortley), optionally / sin(theta).

    Upward recurrence in l starting from the sectoral value; every step is
    O(1) in magnitude so nothing overflows up to l = 29.
    """
    fac = 1.0 / (4.0 * math.pi)
    for k in range(1, m_abs + 1):
        fac *= (2 * k - 1) / (2 * k)
    start = (-1) ** m_abs * math.sqrt((2 * m_abs + 1) * fac)
    sin_pow = m_abs - 1 if strip else m_abs
    pmm = start * s**sin_pow
    if l == m_abs:
        return pmm
    pm1 = u * math.sqrt(2 * m_abs + 3) * pmm
    if l == m_abs + 1:
        return pm1
    p_prev, p_cur = pmm, pm1
    for ll in range(m_abs + 2, l + 1):
        a = math.sqrt((4 * ll * ll - 1) / (ll * ll - m_abs * m_abs))
        b = math.sqrt(((ll - 1) ** 2 - m_abs * m_abs) / (4 * (ll - 1) ** 2 - 1))
        p_prev, p_cur = p_cur, a * (u * p_cur - b * p_prev)
    return p_cur


def _angles(theta):
    theta = np.asarray(theta, dtype=float)
    return np.cos(theta), np.sin(theta)


def theta_factor(l: int, m: int, u, s=None):
    """Theta(theta) with Y_{lm} = Theta(theta) e^{i m phi}; ``u = cos(theta)``."""
    u = np.asarray(u, dtype=float)
    if abs(m) > l:
        return np.zeros_like(u)
    if s is None:
        s = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    val = _legendre_column(l, abs(m), u, s, strip=False)
    val = val * np.ones_like(u)
    return val if m >= 0 else (-1) ** (-m) * val


def theta_over_sin(l: int, m: int, u, s=None):
    """Theta(theta)/sin(theta), using the analytic limit on the z-axis.

    Only meaningful for m != 0 (for m = 0 the quotient is singular, but it
    always appears multiplied by m).
    """
    u = np.asarray(u, dtype=float)
    if m == 0 or abs(m) > l:
        return np.zeros_like(u)
    if s is None:
        s = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    val = _legendre_column(l, abs(m), u, s, strip=True) * np.ones_like(u)
    return val if m >= 0 else (-1) ** (-m) * val


def theta_derivative(l: int, m: int, u, s=None):
    """d Theta/d theta from the ladder relation

        dTheta_{lm}/dtheta = (sqrt((l-m)(l+m+1)) Theta_{l,m+1}
                              - sqrt((l+m)(l-m+1)) Theta_{l,m-1}) / 2
    """
    up = math.sqrt((l - m) * (l + m + 1))
    down = math.sqrt((l + m) * (l - m + 1))
    return 0.5 * (up * theta_factor(l, m + 1, u, s) - down * theta_factor(l, m - 1, u, s))


def spherical_harmonic(l: int, m: int, theta, phi):
    """Orthonormal Y_{lm}(theta, phi) with the Condon-Shortley phase."""
    if not (l >= 0 and -l <= m <= l):
        raise DomainError(f"invalid (l, m) = ({l}, {m})")
    u, s = _angles(theta)
    return theta_factor(l, m, u, s) * np.exp(1j * m * np.asarray(phi, dtype=float))


def wavefunction(qn: QuantumNumbers, r, theta, phi):
    return radial_wavefunction(qn.n, qn.l, r) * spherical_harmonic(qn.l, qn.m, theta, phi)


def eval_state_and_gradient(qn: QuantumNumbers, r, theta, phi):
    """psi and its gradient in the local spherical frame.

    Returns ``(psi, (d_r psi, (1/r) d_theta psi, (1/(r sin theta)) d_phi psi))``.
    All derivatives are analytic. On the z-axis the azimuthal component is
    taken from the limit of Theta/sin(theta); at r = 0 the 1/r factors are
    taken from the polynomial P(r)/r, which is finite for l >= 1 and
    multiplies vanishing angular factors for l = 0.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    if np.any((theta < 0) | (theta > math.pi)):
        raise DomainError("theta must lie in [0, pi]")
    n, l, m = qn.n, qn.l, qn.m
    u, s = _angles(theta)
    phase = np.exp(1j * m * np.asarray(phi, dtype=float))
    p, dp = radial_polynomial(n, l, r, order=1)
    env = np.exp(-r / n)
    rad = p * env
    drad = (dp - p / n) * env
    th = theta_factor(l, m, u, s)
    dth = theta_derivative(l, m, u, s)
    if l == 0:
        rad_over_r = np.zeros_like(r)
    else:
        rad_over_r = radial_polynomial_over_r(n, l, r) * env
    psi = rad * th * phase
    g_r = drad * th * phase
    g_theta = rad_over_r * dth * phase
    g_phi = 1j * m * rad_over_r * theta_over_sin(l, m, u, s) * phase
    return psi, (g_r, g_theta, g_phi)


# ---------------------------------------------------------------------------
# Superpositions


@dataclass
class Superposition:
    """Finite expansion sum_k c_k |n_k l_k m_k>.

    Terms are kept sorted by quantum numbers so that every downstream sum
    runs in a fixed order.
    """

    terms: dict[QuantumNumbers, complex] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {k: complex(self.terms[k]) for k in sorted(self.terms)}

    @classmethod
    def basis(cls, qn: QuantumNumbers) -> "Superposition":
        return cls({qn: 1.0})

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[QuantumNumbers, complex]], **metadata):
        terms: dict[QuantumNumbers, complex] = {}
        for qn, c in pairs:
            if qn in terms:
                raise DomainError(f"duplicate term {qn}")
            terms[qn] = c
        return cls(terms, dict(metadata))

    def __iter__(self) -> Iterator[tuple[QuantumNumbers, complex]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, qn: QuantumNumbers) -> complex:
        return self.terms.get(qn, 0j)

    def keys(self):
        return self.terms.keys()

    def norm2(self) -> float:
        return math.fsum(abs(c) ** 2 for c in self.terms.values())

    def scaled(self, factor: complex) -> "Superposition":
        return Superposition({k: factor * c for k, c in self.terms.items()}, dict(self.metadata))

    def combine(self, other: "Superposition", a: complex = 1.0, b: complex = 1.0) -> "Superposition":
        """a*self + b*other (metadata of self kept)."""
        keys = set(self.terms) | set(other.terms)
        return Superposition(
            {k: a * self[k] + b * other[k] for k in keys}, dict(self.metadata)
        )

    @staticmethod
    def linear(parts: Iterable[tuple[complex, "Superposition"]]) -> "Superposition":
        """sum_j a_j S_j, each coefficient accumulated with fsum."""
        parts = list(parts)
        keys = sorted(set().union(*(p.terms for _, p in parts))) if parts else []
        out = {}
        for k in keys:
            vals = [a * p[k] for a, p in parts]
            out[k] = complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
        return Superposition(out)

    def max_abs_excluding(self, qn: QuantumNumbers) -> float:
        return max((abs(c) for k, c in self.terms.items() if k != qn), default=0.0)

    def to_dict(self) -> dict:
        return {
            "terms": [
                {"n": k.n, "l": k.l, "m": k.m, "re": c.real, "im": c.imag}
                for k, c in self.terms.items()
            ],
            "metadata": dict(self.metadata),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Superposition":
        pairs = (
            (QuantumNumbers(t["n"], t["l"], t["m"]), complex(t["re"], t["im"]))
            for t in data["terms"]
        )
        return cls.from_pairs(pairs, **dict(data.get("metadata", {})))

    @classmethod
    def from_json(cls, text: str) -> "Superposition":
        return cls.from_dict(json.loads(text))


def phase_align(values, reference_index: int | None = None):
    """Rotate a complex vector so its reference entry is real positive."""
    values = np.asarray(values, dtype=complex)
    if reference_index is None:
        nz = np.flatnonzero(np.abs(values) > 1e-12)
        if nz.size == 0:
            return values
        reference_index = int(nz[-1])
    ref = values[reference_index]
    return values * cmath.exp(-1j * cmath.phase(ref))
