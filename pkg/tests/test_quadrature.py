import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import laguerre, legendre

from hidmom.basis import QuantumNumbers, radial_wavefunction, states_up_to
from hidmom.quadrature import (
    DEFAULT_QUADRATURE,
    GRAD_PLUS,
    INV_R_KERNEL,
    OVERLAP,
    X_KERNEL,
    Z_KERNEL,
    Kernel,
    KernelError,
    QuadratureConfig,
    gauss_laguerre,
    gauss_legendre,
    sandwich_integral,
)


@pytest.mark.parametrize("count", [1, 2, 5, 20, 40, 60])
def test_laguerre_matches_numpy(count):
    x, w = laguerre.laggauss(count)
    rule = gauss_laguerre(count)
    np.testing.assert_allclose(rule.nodes, x, rtol=1e-12)
    big = w > 1e-200
    np.testing.assert_allclose(rule.weights[big], w[big], rtol=1e-9)


@pytest.mark.parametrize("count", [1, 2, 7, 30, 64])
def test_legendre_matches_numpy(count):
    x, w = legendre.leggauss(count)
    rule = gauss_legendre(count)
    np.testing.assert_allclose(rule.nodes, x, atol=1e-14)
    # numpy and scipy weights themselves differ by ~2e-12 at count 64
    np.testing.assert_allclose(rule.weights, w, rtol=5e-12)
    np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])


def test_laguerre_monomial_exactness():
    rule = gauss_laguerre(12, scale=0.75)
    for k in range(0, 24):
        exact = math.factorial(k) / 0.75 ** (k + 1)
        assert rule.integrate(lambda r: r**k) == pytest.approx(exact, rel=1e-12)


def test_legendre_monomial_exactness():
    rule = gauss_legendre(9)
    for k in range(0, 18):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert rule.integrate(lambda u: u**k) == pytest.approx(exact, abs=1e-14)


def test_bad_counts():
    with pytest.raises(ValueError):
        gauss_laguerre(0)
    with pytest.raises(ValueError):
        gauss_laguerre(3, scale=0.0)


def test_kernel_validation():
    with pytest.raises(KernelError):
        Kernel(1, 0, 0, 1)  # e^{i phi} without sin
    with pytest.raises(KernelError):
        Kernel(-3)
    with pytest.raises(KernelError):
        Kernel(0, ket_gradient=5)


def test_dipole_closed_forms():
    q100, q200 = QuantumNumbers(1, 0, 0), QuantumNumbers(2, 0, 0)
    z = sandwich_integral(q100, QuantumNumbers(2, 1, 0), Z_KERNEL)
    assert z == pytest.approx(128 * math.sqrt(2) / 243, abs=1e-14)
    assert sandwich_integral(q200, QuantumNumbers(2, 1, 0), Z_KERNEL) == pytest.approx(-3.0, abs=1e-13)
    assert sandwich_integral(q200, QuantumNumbers(2, 1, 1), X_KERNEL) == pytest.approx(3 / math.sqrt(2), abs=1e-13)
    assert sandwich_integral(q200, QuantumNumbers(2, 1, -1), X_KERNEL) == pytest.approx(-3 / math.sqrt(2), abs=1e-13)


def test_radial_moments():
    r_kernel = ((1.0, Kernel(1)),)
    r2_kernel = ((1.0, Kernel(2)),)
    for qn in states_up_to(9)[::7]:
        n, l = qn.n, qn.l
        assert sandwich_integral(qn, qn, r_kernel).real == pytest.approx((3 * n * n - l * (l + 1)) / 2, rel=1e-12)
        assert sandwich_integral(qn, qn, r2_kernel).real == pytest.approx(
            n * n * (5 * n * n + 1 - 3 * l * (l + 1)) / 2, rel=1e-12)
        assert sandwich_integral(qn, qn, INV_R_KERNEL).real == pytest.approx(1 / (n * n), rel=1e-12)


def test_trapezoid_oracle():
    # <R21| r |R32> radial integral against a plain dense trapezoid sum
    r = np.linspace(0.0, 120.0, 400001)
    ref = np.trapezoid(radial_wavefunction(2, 1, r) * radial_wavefunction(3, 2, r) * r**3, r)
    rule = gauss_laguerre(12, scale=0.5 + 1 / 3)
    got = np.dot(rule.weights, radial_wavefunction(2, 1, rule.nodes) * radial_wavefunction(3, 2, rule.nodes)
                 * rule.nodes**3 * np.exp((0.5 + 1 / 3) * rule.nodes))
    assert got == pytest.approx(ref, rel=1e-9)


def test_orthonormality():
    states = states_up_to(8)
    by_m = {}
    for q in states:
        by_m.setdefault(q.m, []).append(q)
    for group in by_m.values():
        for i, a in enumerate(group):
            for b in group[i:]:
                val = sandwich_integral(a, b, OVERLAP)
                assert abs(val - (1.0 if a == b else 0.0)) <= 1e-12, (a, b, val)
    assert sandwich_integral(QuantumNumbers(2, 1, 1), QuantumNumbers(2, 1, 0), OVERLAP) == 0


@st.composite
def pair(draw):
    def one():
        n = draw(st.integers(1, 14))
        l = draw(st.integers(0, n - 1))
        return QuantumNumbers(n, l, draw(st.integers(-l, l)))
    return one(), one()


@given(pair())
@settings(max_examples=40, deadline=None)
def test_hermiticity_without_table(ab):
    a, b = ab
    for kernel in (X_KERNEL, Z_KERNEL, INV_R_KERNEL):
        v1 = sandwich_integral(a, b, kernel)
        v2 = sandwich_integral(b, a, kernel).conjugate()
        assert abs(v1 - v2) <= 1e-12 * max(1.0, abs(v1))


@given(pair())
@settings(max_examples=25, deadline=None)
def test_doubling_invariance(ab):
    a, b = ab
    for kernel in (X_KERNEL, Z_KERNEL, ((1.0, Kernel(-1, ket_gradient=GRAD_PLUS, phi_harmonic=0)),)):
        base = sandwich_integral(a, b, kernel)
        dbl = sandwich_integral(a, b, kernel, DEFAULT_QUADRATURE.doubled(a, b))
        assert abs(base - dbl) <= 1e-11 * max(1.0, abs(base))


def test_phi_selection_exact_zero():
    a, b = QuantumNumbers(3, 2, 2), QuantumNumbers(3, 1, 0)
    assert sandwich_integral(a, b, X_KERNEL) == 0
    assert sandwich_integral(a, b, Z_KERNEL) == 0


def test_config_counts():
    cfg = QuadratureConfig(radial_margin=0, angular_extra=0)
    assert cfg.radial_count(1, 1, 0) == 3
    assert cfg.angular_count(2, 3) == 5
