import random

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from qsetlab.core import Species, add_macro_atom, add_micro_atom, make_qset, new_universe
from qsetlab.errors import NotInCarrier
from qsetlab.metric import QuasiMetricSpace, audit_axioms, qm_distance


def triangle(ab=3.0, bc=4.0, ac=5.0):
    u = new_universe([])
    a, b, c = (add_macro_atom(u, label) for label in "abc")
    carrier = make_qset(u, [a, b, c])
    table = {(a, b): ab, (b, c): bc, (a, c): ac}
    return u, (a, b, c), QuasiMetricSpace.from_table(u, carrier, table, symmetric=True)


def axioms(report):
    return report.failed_axioms()


def test_euclidean_triangle_passes():
    _, _, space = triangle()
    report = audit_axioms(space)
    assert report.passed
    assert report.summary() == "6/6 axioms verified, 9 pairs, 27 triples"
    assert report.congruence == []


def test_empty_carrier_fails_item_one():
    u = new_universe([])
    report = audit_axioms(QuasiMetricSpace.from_table(u, make_qset(u, []), {}))
    assert axioms(report) == [1]
    assert not report.passed


def test_missing_distance_is_item_two():
    u = new_universe([])
    a, b = add_macro_atom(u, "a"), add_macro_atom(u, "b")
    space = QuasiMetricSpace.from_table(u, make_qset(u, [a, b]), {(a, b): 1.0})
    report = audit_axioms(space)
    assert 2 in axioms(report)
    assert any(v.axiom == 2 and v.witnesses == (b, a) for v in report.violations)


def test_zero_distance_between_distinguishables():
    _, (a, b, _), space = triangle(ab=0.0, bc=4.0, ac=4.0)
    report = audit_axioms(space)
    assert {3, 4} <= set(axioms(report))
    assert any(v.axiom == 3 and set(v.witnesses) == {a, b} for v in report.violations)


def test_indistinguishables_must_be_at_distance_zero():
    u = new_universe([Species("electron")])
    e1, e2 = add_micro_atom(u, "electron"), add_micro_atom(u, "electron")
    space = QuasiMetricSpace.from_table(u, make_qset(u, [e1, e2]), {(e1, e2): 1.0}, symmetric=True)
    assert {3, 4} <= set(axioms(audit_axioms(space)))
    fixed = QuasiMetricSpace.from_table(u, make_qset(u, [e1, e2]), {(e1, e2): 0.0}, symmetric=True)
    assert audit_axioms(fixed).passed


def test_asymmetry_and_triangle_are_reported_with_witnesses():
    u, (a, b, c), _ = triangle()
    table = {(a, b): 1.0, (b, a): 2.0, (b, c): 1.0, (c, b): 1.0, (a, c): 5.0, (c, a): 5.0}
    report = audit_axioms(QuasiMetricSpace.from_table(u, make_qset(u, [a, b, c]), table))
    assert axioms(report) == [5, 6]
    assert any(v.axiom == 6 and v.witnesses == (a, b, c) and v.values == (5.0, 1.0, 1.0)
               for v in report.violations)
    record = next(v for v in report.violations if v.axiom == 5).to_record()
    assert record == {"axiom": 5, "witnesses": [a, b], "values": [1.0, 2.0]}


def test_congruence_reported_separately():
    u = new_universe([])
    a1, a2, b = add_macro_atom(u, "a"), add_macro_atom(u, "a"), add_macro_atom(u, "b")
    table = {(a1, a2): 0.0, (a1, b): 1.0, (a2, b): 1.5}
    space = QuasiMetricSpace.from_table(u, make_qset(u, [a1, a2, b]), table, symmetric=True)
    report = audit_axioms(space)
    assert report.congruence
    first = report.congruence[0]
    assert first.witnesses == (a1, a2, b)
    assert first.values == (1.0, 1.5)
    assert report.failed_axioms() == [6]
    record = first.to_record()
    assert record == {"derived": "congruence", "witnesses": [a1, a2, b], "values": [1.0, 1.5]}
    assert "axiom" not in record
    assert str(first).startswith("congruence:")
    assert "total and real valued" not in str(first)


def test_distance_outside_carrier():
    u, (a, b, _), space = triangle()
    stray = add_macro_atom(u, "stray")
    assert qm_distance(space, a, b) == 3.0
    with pytest.raises(NotInCarrier):
        qm_distance(space, a, stray)


def random_space(seed: int, n: int, noise: float):
    rng = np.random.default_rng(seed)
    u = new_universe([])
    handles = [add_macro_atom(u, f"p{i}") for i in range(n)]
    coords = rng.uniform(-1, 1, size=(n, 2))
    table = {}
    for i, x in enumerate(handles):
        for j, y in enumerate(handles):
            if i != j:
                table[(x, y)] = float(np.linalg.norm(coords[i] - coords[j]) + rng.normal(0, noise))
    return QuasiMetricSpace.from_table(u, make_qset(u, handles), table)


@hsettings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 16), eps=st.floats(1e-12, 1e-2), factor=st.floats(1.0, 100.0))
def test_audit_is_monotone_in_epsilon(seed, eps, factor):
    space = random_space(seed, 6, 1e-3)
    tight = {(v.axiom, v.witnesses) for v in audit_axioms(space, epsilon=eps).violations}
    loose = {(v.axiom, v.witnesses) for v in audit_axioms(space, epsilon=eps * factor).violations}
    assert loose <= tight


def test_parallel_triangle_check_matches_serial(monkeypatch):
    monkeypatch.setattr("qsetlab.metric.TRIANGLE_BUDGET", 64)
    space = random_space(3, 12, 0.3)
    serial = audit_axioms(space, epsilon=1e-9, workers=1)
    parallel = audit_axioms(space, epsilon=1e-9, workers=4)
    assert serial.violations == parallel.violations
    assert 6 in serial.failed_axioms()


def test_audit_scales_to_a_few_hundred_points():
    rng = random.Random(1)
    u = new_universe([])
    handles = [add_macro_atom(u, f"x{i}") for i in range(150)]
    points = {h: rng.uniform(0, 10) for h in handles}
    space = QuasiMetricSpace.from_function(u, make_qset(u, handles),
                                           lambda x, y: abs(points[x] - points[y]))
    report = audit_axioms(space)
    assert report.passed
    assert report.triples_checked == 150 ** 3
