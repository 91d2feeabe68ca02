"""Gaussian quadrature for sandwiches of hydrogen states.

Every integrand met in this package has the form

    (polynomial in r) * exp(-(1/n_a + 1/n_b) r) * (polynomial in u = cos theta)
    * exp(i k phi),

so the phi integral is done analytically and the (r, u) integral is exact
with Gauss-Laguerre x Gauss-Legendre rules of sufficient order. Moreover
each factor is a short sum of separable terms f(r) g(u), so a sandwich
reduces to a handful of 1-D dot products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .basis import (
    QuantumNumbers,
    radial_polynomial,
    radial_polynomial_over_r,
    theta_derivative,
    theta_factor,
    theta_over_sin,
)


class QuadratureError(RuntimeError):
    """Node search did not converge."""


class KernelError(ValueError):
    """Kernel shape the exact quadrature cannot handle."""


@dataclass(frozen=True)
class RadialRule:
    nodes: np.ndarray
    weights: np.ndarray
    scale: float
    degree: int

    def integrate(self, f) -> float:
        """Approximate int_0^inf f(r) exp(-scale r) dr."""
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True)
class AngularRule:
    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _laguerre_pair(count: int, x):
    """(L_count(x), L_{count-1}(x)) for alpha = 0."""
    prev = np.ones_like(x)
    cur = 1.0 - x
    if count == 1:
        return cur, prev
    for j in range(1, count):
        prev, cur = cur, ((2 * j + 1 - x) * cur - j * prev) / (j + 1)
    return cur, prev


@lru_cache(maxsize=None)
def _laguerre_unit(count: int):
    # Golub-Welsch eigenvalues seed Newton; the recurrence does the polishing.
    diag = 2.0 * np.arange(count) + 1.0
    off = np.arange(1, count, dtype=float)
    jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    x = np.sort(np.linalg.eigvalsh(jac))
    for _ in range(100):
        ln, ln1 = _laguerre_pair(count, x)
        dln = count * (ln - ln1) / x
        dx = ln / dln
        x = x - dx
        if np.all(np.abs(dx) <= 1e-14 * np.maximum(1.0, x)):
            break
    else:
        raise QuadratureError(
            f"Gauss-Laguerre Newton iteration failed for count={count}: "
            f"max |dx| = {np.max(np.abs(dx)):.3e}, nodes = {x}"
        )
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise QuadratureError(f"Gauss-Laguerre nodes not positive/distinct for count={count}")
    ln, ln1 = _laguerre_pair(count, x)
    lnext = ((2 * count + 1 - x) * ln - count * ln1) / (count + 1)
    w = x / ((count + 1) ** 2 * lnext**2)
    return x, w


def gauss_laguerre(count: int, scale: float = 1.0) -> RadialRule:
    """Rule for int_0^inf f(r) exp(-scale r) dr, exact for deg f <= 2 count - 1."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not scale > 0:
        raise ValueError("scale must be positive")
    x, w = _laguerre_unit(count)
    return RadialRule(_freeze(x / scale), _freeze(w / scale), float(scale), 2 * count - 1)


@lru_cache(maxsize=None)
def _legendre_unit(count: int):
    if count == 1:
        return np.array([0.0]), np.array([2.0])
    i = np.arange(1, count + 1)
    x = np.cos(math.pi * (i - 0.25) / (count + 0.5))
    for _ in range(100):
        p_prev, p = np.ones_like(x), x.copy()
        for j in range(2, count + 1):
            p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
        dp = count * (x * p - p_prev) / (x * x - 1.0)
        dx = p / dp
        x = x - dx
        if np.all(np.abs(dx) <= 1e-15):
            break
    else:
        raise QuadratureError(f"Gauss-Legendre Newton iteration failed for count={count}")
    p_prev, p = np.ones_like(x), x.copy()
    for j in range(2, count + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    dp = count * (x * p - p_prev) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # exact symmetry about u = 0
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def gauss_legendre(count: int) -> AngularRule:
    """Rule on [-1, 1], exact for polynomials of degree <= 2 count - 1."""
    if count < 1:
        raise ValueError("count must be >= 1")
    x, w = _legendre_unit(count)
    return AngularRule(_freeze(x), _freeze(w), 2 * count - 1)


# ---------------------------------------------------------------------------
# Kernels

GRAD_PLUS, GRAD_MINUS, GRAD_Z = 1, -1, 0


@dataclass(frozen=True)
class Kernel:
    """One separable operator term.

    Represents r^radial_power sin^sin_power(theta) cos^cos_power(theta)
    e^{i phi_harmonic phi}, optionally with a spherical gradient component
    acting on the ket and/or the bra. Gradient components are encoded as
    +1 for (d_x + i d_y), -1 for (d_x - i d_y) and 0 for d_z. A bra
    gradient means the integrand uses conj(D psi_bra).
    """

    radial_power: int = 0
    sin_power: int = 0
    cos_power: int = 0
    phi_harmonic: int = 0
    ket_gradient: int | None = None
    bra_gradient: int | None = None

    def __post_init__(self):
        if self.sin_power < 0 or self.cos_power < 0:
            raise KernelError("negative trigonometric powers are not supported")
        # each e^{+-i phi} must travel with one sin(theta) so the u-integrand stays polynomial
        if self.sin_power < abs(self.phi_harmonic) or (self.sin_power - self.phi_harmonic) % 2:
            raise KernelError(
                f"sin power {self.sin_power} incompatible with phi harmonic {self.phi_harmonic}"
            )
        for g in (self.ket_gradient, self.bra_gradient):
            if g not in (None, GRAD_PLUS, GRAD_MINUS, GRAD_Z):
                raise KernelError(f"unknown gradient component {g!r}")
        n_grad = (self.ket_gradient is not None) + (self.bra_gradient is not None)
        if self.radial_power + n_grad < -2 or self.radial_power > 4:
            raise KernelError(f"radial power {self.radial_power} outside the exact range")


Terms = Sequence[tuple[complex, Kernel]]
KernelLike = Union[Kernel, Terms]

OVERLAP: Terms = ((1.0, Kernel()),)
# x = r sin(theta) cos(phi),  y = r sin(theta) sin(phi),  z = r cos(theta)
X_KERNEL: Terms = ((0.5, Kernel(1, 1, 0, 1)), (0.5, Kernel(1, 1, 0, -1)))
Y_KERNEL: Terms = ((-0.5j, Kernel(1, 1, 0, 1)), (0.5j, Kernel(1, 1, 0, -1)))
Z_KERNEL: Terms = ((1.0, Kernel(1, 0, 1, 0)),)
INV_R_KERNEL: Terms = ((1.0, Kernel(-1)),)


@dataclass(frozen=True)
class QuadratureConfig:
    """Margins on top of the exactness-derived node counts."""

    radial_margin: int = 8
    angular_extra: int = 6

    def radial_count(self, n_bra: int, n_ket: int, radial_power: int) -> int:
        return math.ceil((n_bra + n_ket + max(radial_power, 0) + 4) / 2) + self.radial_margin

    def angular_count(self, l_bra: int, l_ket: int) -> int:
        return l_bra + l_ket + self.angular_extra

    def doubled(self, bra: QuantumNumbers, ket: QuantumNumbers) -> "QuadratureConfig":
        """Config whose counts are at least twice the default for this pair."""
        r = self.radial_count(bra.n, ket.n, 4)
        a = self.angular_count(bra.l, ket.l)
        return QuadratureConfig(self.radial_margin + r, self.angular_extra + a)


DEFAULT_QUADRATURE = QuadratureConfig()


@lru_cache(maxsize=4096)
def _radial_pieces(n: int, l: int, scale: float, count: int):
    """(P, R'-envelope-stripped, P/r) on the nodes of the (count, scale) rule."""
    rule = gauss_laguerre(count, scale)
    r = rule.nodes
    p, dp = radial_polynomial(n, l, r, order=1)
    return p, dp - p / n, radial_polynomial_over_r(n, l, r)


@lru_cache(maxsize=4096)
def _angular_pieces(l: int, m: int, count: int):
    u = gauss_legendre(count).nodes
    s = np.sqrt(1.0 - u * u)
    return u, s, theta_factor(l, m, u, s), theta_derivative(l, m, u, s), theta_over_sin(l, m, u, s)


def _factor(qn: QuantumNumbers, grad, scale: float, rcount: int, acount: int):
    """Separable pieces [(radial, angular), ...] and phi harmonic of (D) psi."""
    p, dp, p_over_r = _radial_pieces(qn.n, qn.l, scale, rcount)
    u, s, th, dth, th_s = _angular_pieces(qn.l, qn.m, acount)
    m = qn.m
    if grad is None:
        return [(p, th)], m
    if grad == GRAD_PLUS:
        return [(dp, s * th), (p_over_r, u * dth - m * th_s)], m + 1
    if grad == GRAD_MINUS:
        return [(dp, s * th), (p_over_r, u * dth + m * th_s)], m - 1
    return [(dp, u * th), (p_over_r, -s * dth)], m


def _single(bra: QuantumNumbers, ket: QuantumNumbers, k: Kernel, config: QuadratureConfig) -> float:
    # phi selection rule: exact zero before any numerics
    bra_m = bra.m + (k.bra_gradient or 0)
    ket_m = ket.m + (k.ket_gradient or 0)
    if bra_m != ket_m + k.phi_harmonic:
        return 0.0
    scale = 1.0 / bra.n + 1.0 / ket.n
    rcount = config.radial_count(bra.n, ket.n, k.radial_power)
    acount = config.angular_count(bra.l, ket.l)
    rrule = gauss_laguerre(rcount, scale)
    arule = gauss_legendre(acount)
    bra_f, _ = _factor(bra, k.bra_gradient, scale, rcount, acount)
    ket_f, _ = _factor(ket, k.ket_gradient, scale, rcount, acount)
    r = rrule.nodes
    u = arule.nodes
    rw = rrule.weights * r ** (k.radial_power + 2)
    aw = arule.weights * np.sqrt(1.0 - u * u) ** k.sin_power * u**k.cos_power
    parts = []
    for fr, fa in bra_f:
        for gr, ga in ket_f:
            parts.append(np.dot(rw, fr * gr) * np.dot(aw, fa * ga))
    return 2.0 * math.pi * math.fsum(parts)


def sandwich_integral(
    bra: QuantumNumbers,
    ket: QuantumNumbers,
    kernel: KernelLike,
    config: QuadratureConfig = DEFAULT_QUADRATURE,
) -> complex:
    """<bra| kernel |ket> by exact Gaussian quadrature.

    Args:
        bra, ket: hydrogen states.
        kernel: a single ``Kernel`` or a sequence of ``(coefficient, Kernel)``.
        config: node-count margins.

    Returns:
        The complex matrix element; exactly zero when the phi selection rule
        fails for every term.
    """
    terms = ((1.0, kernel),) if isinstance(kernel, Kernel) else kernel
    vals = []
    for coef, k in terms:
        if not isinstance(k, Kernel):
            raise KernelError(f"unsupported kernel {k!r}")
        v = _single(bra, ket, k, config)
        if v != 0.0:
            vals.append(complex(coef) * v)
    if not vals:
        return 0j
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
