import json
import math

import numpy as np
import pytest

from hidmom.basis import QuantumNumbers, Superposition
from hidmom.momentum import (
    DipoleMoment,
    classical_dipole_momentum,
    eq9_ratio,
    expected_ratio,
    method1,
    method2,
)
from hidmom.operators import ElementTable
from hidmom.stark import FieldConfig, perturbed_state
from hidmom.units import BOHR_MAGNETON, SPEED_OF_LIGHT

Q = QuantumNumbers

# frozen outputs at E = 1e-8, theta = 0, n_max = 20
FROZEN_RATIOS = {
    (13, 12, -5): 4.998371277454895,
    (11, 7, -4): 3.9455532541896554,
    (6, 5, -3): 2.9859396739335584,
    (12, 8, -2): 1.9777088753687442,
    (3, 1, -1): 0.8621076264073942,
    (1, 0, 0): 0.0,
    (2, 1, 1): -0.8717576664432168,
    (9, 2, 2): -1.8452278733142473,
    (8, 4, 3): -2.8967804948711033,
    (5, 4, 4): -3.962423521555276,
    (7, 6, 5): -4.987456901869881,
}


@pytest.mark.parametrize("nlm", list(FROZEN_RATIOS), ids=str)
def test_frozen_ratio(nlm, table):
    rep = eq9_ratio(Q(*nlm), FieldConfig(1e-8), 20, table)
    assert rep.ratio == pytest.approx(FROZEN_RATIOS[nlm], rel=1e-9, abs=1e-12)
    assert rep.expected_ratio == -nlm[2]


def test_tilt_frozen(table):
    rep = eq9_ratio(Q(3, 1, -1), FieldConfig(1e-8, math.pi / 4), 20, table)
    assert rep.ratio == pytest.approx(0.6096021487450395, rel=1e-9)
    assert rep.p2a == pytest.approx(math.sqrt(0.5), rel=1e-9)
    assert rep.expected_ratio == pytest.approx(math.sqrt(0.5), rel=1e-15)


def test_expected_ratio_rules():
    assert expected_ratio(Q(2, 1, 1), FieldConfig()) == -1.0
    assert expected_ratio(Q(2, 1, 1), FieldConfig(1e-8, 0.3)) is None
    assert expected_ratio(Q(3, 1, -1), FieldConfig(1e-8, math.pi)) == pytest.approx(-1.0)


def test_c_cancellation_bitwise(table):
    for nlm in [(2, 1, 1), (5, 4, 4)]:
        a = eq9_ratio(Q(*nlm), FieldConfig(1e-8), 15, table, c=SPEED_OF_LIGHT)
        b = eq9_ratio(Q(*nlm), FieldConfig(1e-8), 15, table, c=100.0)
        assert a.ratio == b.ratio
        assert a.p1 == b.p1 and a.p2b == b.p2b and a.p2a == b.p2a
        assert a.p1_au != b.p1_au


@pytest.mark.parametrize("nlm", [(2, 1, 1), (3, 1, -1), (5, 4, 4)])
def test_field_linearity(nlm, table):
    a = eq9_ratio(Q(*nlm), FieldConfig(5e-9), 15, table)
    b = eq9_ratio(Q(*nlm), FieldConfig(1e-8), 15, table)
    for name in ("p1_au", "p2a_au", "p2b_au"):
        x, y = getattr(a, name), getattr(b, name)
        assert y == pytest.approx(2 * x, rel=1e-3), name


def test_zero_field_annihilation(table):
    for nlm in [(2, 1, 1), (3, 1, -1), (1, 0, 0)]:
        rep = eq9_ratio(Q(*nlm), FieldConfig(0.0), 10, table)
        for name in ("p1_au", "p2a_au", "p2b_au", "p2_total_au", "v_c", "classical_au"):
            assert getattr(rep, name) == 0.0, name
        assert rep.ratio is None and rep.p1 is None


def test_bare_state_kills_perturbative_terms(table):
    # with every admixture zeroed only the leading dipole term survives
    q = Q(3, 1, -1)
    rep = eq9_ratio(q, FieldConfig(1e-8), 10, table, state=Superposition.basis(q))
    assert rep.p1_au == 0.0
    assert rep.p2b_au == 0.0
    assert rep.v_c == 0.0
    assert rep.p2a == pytest.approx(1.0, rel=1e-12)


def test_worker_determinism():
    reps = [eq9_ratio(Q(5, 4, 4), FieldConfig(1e-8), 12, ElementTable(), workers=w) for w in (1, 3)]
    assert json.dumps(reps[0].to_dict(), sort_keys=True) == json.dumps(reps[1].to_dict(), sort_keys=True)


def test_method_vectors_transverse(table):
    psi = perturbed_state(Q(2, 1, 1), FieldConfig(1e-8), 12, table)
    n1 = method1(psi, table)
    a, b = method2(psi, FieldConfig(1e-8), table)
    assert n1[0] == 0.0 and n1[2] == 0.0
    assert b[0] == 0.0 and b[2] == 0.0
    assert a[1] == pytest.approx(-1.0, rel=1e-9)


def test_classical_dipole():
    mu = DipoleMoment((0.0, 0.0, -1.0))
    p = classical_dipole_momentum(mu, (1e-8, 0.0, 0.0))
    np.testing.assert_allclose(p, [0.0, -BOHR_MAGNETON * 1e-8 / SPEED_OF_LIGHT**2, 0.0], rtol=1e-15)
    assert np.all(classical_dipole_momentum(mu, (0.0, 0.0, 1e-8)) == 0.0)


@pytest.mark.parametrize("nlm", [(2, 1, 1), (5, 4, 4), (3, 1, -1)])
def test_classical_matches_p2a(nlm, table):
    rep = eq9_ratio(Q(*nlm), FieldConfig(1e-8), 20, table)
    assert rep.p2a_au == pytest.approx(rep.classical_au, rel=1e-3)


def test_report_schema(table):
    jsonschema = pytest.importorskip("jsonschema")
    from hidmom.tables import load_schema

    for field in (FieldConfig(1e-8), FieldConfig(0.0)):
        rep = eq9_ratio(Q(2, 1, 1), field, 10, table)
        data = json.loads(json.dumps(rep.to_dict()))
        jsonschema.validate(data, load_schema("report"))
        assert set(data["meta"]["si_factors"]) >= {"momentum_kg_m_per_s", "electric_field_V_per_m"}


def test_truncation_convergence_diagnostic(table, capsys):
    improved, total = 0, 0
    for nlm in FROZEN_RATIOS:
        if nlm[0] > 10:
            continue
        target = -nlm[2]
        r10 = eq9_ratio(Q(*nlm), FieldConfig(1e-8), 10, table).ratio
        total += 1
        improved += abs(FROZEN_RATIOS[nlm] - target) <= abs(r10 - target)
    with capsys.disabled():
        print(f"\ntruncation diagnostic: n_max 20 no worse than 10 for {improved}/{total} comparable states")
