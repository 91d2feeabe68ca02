import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special
from scipy.integrate import quad

from hidmom.basis import (
    DomainError,
    QuantumNumbers,
    Superposition,
    energy,
    eval_state_and_gradient,
    genlaguerre,
    radial_derivatives,
    radial_wavefunction,
    spherical_harmonic,
    states_up_to,
    wavefunction,
)


@st.composite
def quantum_numbers(draw, n_max=12):
    n = draw(st.integers(1, n_max))
    l = draw(st.integers(0, n - 1))
    m = draw(st.integers(-l, l))
    return QuantumNumbers(n, l, m)


# -- quantum numbers ---------------------------------------------------------

@pytest.mark.parametrize("bad", [(0, 0, 0), (2, 2, 0), (2, 1, 2), (3, -1, 0), (1, 0, 1)])
def test_invalid_quantum_numbers(bad):
    with pytest.raises(DomainError):
        QuantumNumbers(*bad)


def test_non_integer_rejected():
    with pytest.raises(DomainError):
        QuantumNumbers(2.0, 1, 0)
    with pytest.raises(DomainError):
        QuantumNumbers(True, 0, 0)


def test_parse():
    assert QuantumNumbers.parse("13,12,-5") == QuantumNumbers(13, 12, -5)
    assert QuantumNumbers.parse(" {2, 1, 1} ") == QuantumNumbers(2, 1, 1)
    for bad in ("2,1", "a,b,c", "2,1,5"):
        with pytest.raises(DomainError):
            QuantumNumbers.parse(bad)


def test_energy():
    assert energy(1) == -0.5
    assert energy(QuantumNumbers(2, 1, 0)) == -0.125
    with pytest.raises(DomainError):
        energy(0)


def test_states_up_to_count():
    for n in range(1, 8):
        assert len(states_up_to(n)) == sum(k * k for k in range(1, n + 1))


# -- radial functions --------------------------------------------------------

def test_known_radial_values():
    assert radial_wavefunction(1, 0, 0.0) == pytest.approx(2.0, abs=1e-15)
    r = np.linspace(0, 10, 7)
    np.testing.assert_allclose(radial_wavefunction(2, 1, r), r * np.exp(-r / 2) / (2 * math.sqrt(6)), rtol=1e-14)
    np.testing.assert_allclose(
        radial_wavefunction(2, 0, r), (1 - r / 2) * np.exp(-r / 2) / math.sqrt(2), rtol=1e-13, atol=1e-16
    )


def test_laguerre_matches_scipy():
    x = np.linspace(0, 40, 41)
    for k in range(0, 25):
        for a in (1, 3, 9, 25):
            ref = special.eval_genlaguerre(k, a, x)
            np.testing.assert_allclose(genlaguerre(k, a, x), ref, rtol=1e-10, atol=1e-10 * np.max(np.abs(ref)))


@pytest.mark.parametrize("n", [1, 2, 5, 10, 20, 30])
def test_radial_normalisation(n):
    for l in sorted({0, n // 2, n - 1}):
        val, _ = quad(lambda r: radial_wavefunction(n, l, r) ** 2 * r * r, 0, 5 * n * n + 40, limit=800)
        assert val == pytest.approx(1.0, abs=1e-10)


@given(quantum_numbers(n_max=15))
@settings(max_examples=40, deadline=None)
def test_radial_schrodinger_residual(qn):
    n, l = qn.n, qn.l
    r = np.linspace(0.2, 10.0 * n, 25)
    R, dR, d2R = radial_derivatives(n, l, r)
    lhs = -0.5 * d2R - dR / r + l * (l + 1) / (2 * r * r) * R - R / r
    scale = np.max(np.abs(R / r)) + np.max(np.abs(d2R))
    np.testing.assert_allclose(lhs, energy(n) * R, atol=1e-11 * scale)


def test_radial_nodes():
    # R30 has n - l - 1 = 2 sign changes
    r = np.linspace(0.01, 40, 4000)
    signs = np.sign(radial_wavefunction(3, 0, r))
    assert np.count_nonzero(np.diff(signs)) == 2
    for n in range(1, 9):
        for l in range(n):
            s = np.sign(radial_wavefunction(n, l, np.linspace(1e-3, 8 * n * n, 20000)))
            s = s[s != 0]
            assert np.count_nonzero(np.diff(s)) == n - l - 1


def test_negative_radius():
    with pytest.raises(DomainError):
        radial_wavefunction(2, 0, -1.0)


# -- angular functions -------------------------------------------------------

def test_spherical_harmonics_match_scipy():
    theta = np.linspace(0, math.pi, 17)
    phi = np.linspace(0, 2 * math.pi, 17)
    for l in range(0, 16):
        for m in range(-l, l + 1):
            ref = special.sph_harm_y(l, m, theta, phi)
            np.testing.assert_allclose(spherical_harmonic(l, m, theta, phi), ref, atol=1e-12)


def test_condon_shortley_sign():
    # Y_11 is negative along +x
    assert spherical_harmonic(1, 1, math.pi / 2, 0.0).real < 0
    assert spherical_harmonic(1, -1, math.pi / 2, 0.0).real > 0


def test_high_degree_finite():
    theta = np.linspace(0, math.pi, 101)
    for m in (-29, -15, 0, 15, 29):
        y = spherical_harmonic(29, m, theta, 0.3)
        assert np.all(np.isfinite(y))


@given(quantum_numbers(), st.floats(0.1, 20), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
@settings(max_examples=60, deadline=None)
def test_parity(qn, r, theta, phi):
    a = wavefunction(qn, r, theta, phi)
    b = wavefunction(qn, r, math.pi - theta, phi + math.pi)
    assert abs(b - (-1) ** qn.l * a) <= 1e-12 * max(1.0, abs(a))


# -- gradient ----------------------------------------------------------------

@pytest.mark.parametrize("nlm", [(5, 4, 4), (3, 1, -1), (4, 2, 0), (1, 0, 0)])
def test_gradient_finite_difference(nlm):
    qn = QuantumNumbers(*nlm)
    h = 1e-5
    for r, th, ph in [(1.3, 0.7, 0.4), (6.0, 2.1, 5.0), (9.5, 1.5, 2.2)]:
        _, (gr, gt, gp) = eval_state_and_gradient(qn, r, th, ph)
        d_r = (wavefunction(qn, r + h, th, ph) - wavefunction(qn, r - h, th, ph)) / (2 * h)
        d_t = (wavefunction(qn, r, th + h, ph) - wavefunction(qn, r, th - h, ph)) / (2 * h) / r
        d_p = (wavefunction(qn, r, th, ph + h) - wavefunction(qn, r, th, ph - h)) / (2 * h) / (r * math.sin(th))
        scale = max(abs(wavefunction(qn, r, th, ph)), abs(gr), 1e-6)
        assert abs(gr - d_r) <= 1e-7 * scale
        assert abs(gt - d_t) <= 1e-7 * scale
        assert abs(gp - d_p) <= 1e-7 * scale


def test_gradient_on_axis_finite():
    for nlm in [(2, 1, 1), (5, 4, 4), (3, 2, -1)]:
        psi, grad = eval_state_and_gradient(QuantumNumbers(*nlm), np.array([0.0, 1.0]), np.array([0.0, math.pi]), 0.0)
        assert all(np.all(np.isfinite(g)) for g in grad)


def test_gradient_domain():
    with pytest.raises(DomainError):
        eval_state_and_gradient(QuantumNumbers(2, 1, 0), 1.0, -0.1, 0.0)
    with pytest.raises(DomainError):
        eval_state_and_gradient(QuantumNumbers(2, 1, 0), -1.0, 1.0, 0.0)


# -- superpositions ----------------------------------------------------------

def test_superposition_roundtrip():
    s = Superposition.from_pairs(
        [(QuantumNumbers(2, 1, 1), 1.0), (QuantumNumbers(3, 2, 1), 0.25 - 1e-9j)], E=1e-8
    )
    back = Superposition.from_json(s.to_json())
    assert back.terms == s.terms
    assert back.metadata == {"E": 1e-8}
    assert list(s.keys()) == sorted(s.keys())


def test_superposition_schema():
    jsonschema = pytest.importorskip("jsonschema")
    from hidmom.tables import load_schema

    s = Superposition.from_pairs([(QuantumNumbers(1, 0, 0), 1.0)])
    jsonschema.validate(json.loads(s.to_json()), load_schema("superposition"))


def test_superposition_duplicates_rejected():
    q = QuantumNumbers(1, 0, 0)
    with pytest.raises(DomainError):
        Superposition.from_pairs([(q, 1.0), (q, 2.0)])


def test_superposition_algebra():
    a = Superposition.from_pairs([(QuantumNumbers(1, 0, 0), 1.0), (QuantumNumbers(2, 0, 0), 2j)])
    b = Superposition.from_pairs([(QuantumNumbers(2, 0, 0), 1.0)])
    c = a.combine(b, 2.0, -1.0)
    assert c[QuantumNumbers(2, 0, 0)] == 4j - 1.0
    assert c[QuantumNumbers(3, 0, 0)] == 0j
    assert a.norm2() == 5.0
    assert a.scaled(2).norm2() == 20.0
