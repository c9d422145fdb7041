import itertools
import random

import numpy as np
import pytest

from qsetlab.core import (
    Cardinal,
    Sort,
    Species,
    add_macro_atom,
    add_micro_atom,
    distinguishable,
    extensionally_equal,
    indistinguishable,
    is_micro,
    is_qset,
    is_zfu,
    make_qset,
    member_of,
    members,
    new_universe,
    qset_union,
    quasi_cardinality,
    weak_pair,
    weak_singleton,
)
from qsetlab.errors import (
    DanglingHandle,
    DuplicateSpecies,
    EmptyLabel,
    FrozenUniverse,
    IdentityUndefined,
    NotAQset,
    UnknownSpecies,
)


def test_duplicate_species_rejected():
    with pytest.raises(DuplicateSpecies):
        new_universe([Species("electron"), Species("electron")])


def test_unknown_species_and_empty_label(universe):
    with pytest.raises(UnknownSpecies):
        add_micro_atom(universe, "muon")
    with pytest.raises(EmptyLabel):
        add_macro_atom(universe, "")


def test_handles_are_fresh_and_sorted(universe):
    e = add_micro_atom(universe, "electron")
    m = add_macro_atom(universe, "detector")
    q = make_qset(universe, [e, m])
    assert len({e, m, q}) == 3
    assert is_micro(universe, e) and is_qset(universe, q)
    assert universe.entity(m).sort is Sort.MACRO
    assert members(universe, q) == {e, m}


def test_dangling_handle(universe):
    with pytest.raises(DanglingHandle):
        universe.entity(999)
    with pytest.raises(DanglingHandle):
        make_qset(universe, [42])


def test_frozen_universe_rejects_registration(universe):
    add_micro_atom(universe, "electron")
    universe.freeze()
    with pytest.raises(FrozenUniverse):
        add_macro_atom(universe, "late")


def test_members_of_an_atom(universe):
    e = add_micro_atom(universe, "electron")
    with pytest.raises(NotAQset):
        members(universe, e)


def test_cardinal_is_non_negative():
    assert int(Cardinal(3)) == 3
    with pytest.raises(ValueError):
        Cardinal(-1)


def universe_plans(size, species=3, labels=2):
    """
    Every entity sequence of at most ``size`` entries, up to renaming of
    species and labels. A qset holds nothing, the entity declared just
    before it, or every entity declared before it.
    """
    def extend(plan, used_species, used_labels):
        if plan:
            yield plan
        if len(plan) == size:
            return
        for s in range(min(used_species + 1, species)):
            yield from extend(plan + (("micro", s),), max(used_species, s + 1), used_labels)
        for label in range(min(used_labels + 1, labels)):
            yield from extend(plan + (("macro", label),), used_species, max(used_labels, label + 1))
        k = len(plan)
        for chosen in sorted({(), (k - 1,) if k else (), tuple(range(k))}):
            yield from extend(plan + (("qset", chosen),), used_species, used_labels)

    return extend((), 0, 0)


def build_plan(plan):
    species = ["electron", "photon", "muon"]
    u = new_universe([Species(s) for s in species])
    handles = []
    for kind, arg in plan:
        if kind == "micro":
            handles.append(add_micro_atom(u, species[arg]))
        elif kind == "macro":
            handles.append(add_macro_atom(u, f"label{arg}"))
        else:
            handles.append(make_qset(u, [handles[i] for i in arg]))
    return u, handles


def test_indistinguishability_is_an_equivalence():
    count = 0
    for plan in universe_plans(6):
        u, handles = build_plan(plan)
        same = np.array([[indistinguishable(u, x, y) for y in handles] for x in handles])
        apart = np.array([[distinguishable(u, x, y) for y in handles] for x in handles])
        assert same.diagonal().all(), plan
        assert (same == same.T).all(), plan
        assert (apart == ~same).all(), plan
        # x ~ y and y ~ z for some y forces x ~ z
        chained = (same.astype(int) @ same.astype(int)) > 0
        assert not (chained & ~same).any(), plan
        count += 1
    assert count == 28867


def test_species_and_labels_decide_indistinguishability(universe):
    e1 = add_micro_atom(universe, "electron")
    e2 = add_micro_atom(universe, "electron")
    p = add_micro_atom(universe, "photon")
    a = add_macro_atom(universe, "lab")
    b = add_macro_atom(universe, "lab")
    assert indistinguishable(universe, e1, e2)
    assert not indistinguishable(universe, e1, p)
    assert indistinguishable(universe, a, b)
    assert not indistinguishable(universe, e1, a)


@pytest.mark.parametrize("left,right,rejected", [
    ("micro", "micro", True),
    ("micro", "macro", True),
    ("micro", "qset", True),
    ("macro", "micro", True),
    ("qset", "micro", True),
    ("macro", "macro", False),
    ("macro", "qset", False),
    ("qset", "macro", False),
    ("qset", "qset", False),
])
def test_identity_prohibited_on_m_atoms(universe, left, right, rejected):
    def make(kind):
        if kind == "micro":
            return add_micro_atom(universe, "electron")
        if kind == "macro":
            return add_macro_atom(universe, "lab")
        return make_qset(universe, [])

    x, y = make(left), make(right)
    if rejected:
        with pytest.raises(IdentityUndefined, match="identity undefined for m-atoms"):
            extensionally_equal(universe, x, y)
    else:
        assert extensionally_equal(universe, x, y) == (left == right)


def test_extensional_equality_on_qsets(universe):
    a = add_macro_atom(universe, "a")
    b = add_macro_atom(universe, "b")
    q1 = make_qset(universe, [a, b])
    q2 = make_qset(universe, [b, a, a])
    q3 = make_qset(universe, [a])
    assert extensionally_equal(universe, q1, q2)
    assert not extensionally_equal(universe, q1, q3)


def test_qset_of_m_atoms_has_extensional_equality(universe):
    e1 = add_micro_atom(universe, "electron")
    e2 = add_micro_atom(universe, "electron")
    assert extensionally_equal(universe, make_qset(universe, [e1, e2]), make_qset(universe, [e2, e1]))


def test_weak_pair_saturates(random_universe):
    rng = random.Random(2024)
    for _ in range(200):
        u = random_universe(rng, rng.randint(1, 10))
        before = u.handles()
        x, y = rng.choice(before), rng.choice(before)
        w = weak_pair(u, x, y)
        expected = {t for t in before if indistinguishable(u, t, x) or indistinguishable(u, t, y)}
        assert members(u, w) == expected
        assert member_of(u, x, w) and member_of(u, y, w)
        if is_micro(u, x):
            species = u.entity(x).species
            same = [h for h in before if is_micro(u, h) and u.entity(h).species == species]
            assert quasi_cardinality(u, weak_singleton(u, x)).value == len(same)


def test_weak_pair_of_two_electrons_has_cardinality_two(universe):
    e1 = add_micro_atom(universe, "electron")
    e2 = add_micro_atom(universe, "electron")
    add_micro_atom(universe, "photon")
    pair = weak_pair(universe, e1, e2)
    assert quasi_cardinality(universe, pair) == Cardinal(2)
    assert members(universe, weak_singleton(universe, e1)) == {e1, e2}


def test_weak_pair_ignores_later_entities(universe):
    e1 = add_micro_atom(universe, "electron")
    pair = weak_singleton(universe, e1)
    e2 = add_micro_atom(universe, "electron")
    assert indistinguishable(universe, e1, e2)
    assert not member_of(universe, e2, pair)


def test_union_and_zfu(universe):
    a = add_macro_atom(universe, "a")
    b = add_macro_atom(universe, "b")
    both = qset_union(universe, make_qset(universe, [a]), make_qset(universe, [b]))
    assert members(universe, both) == {a, b}
    assert is_zfu(universe)
    add_micro_atom(universe, "photon")
    assert not is_zfu(universe)


def test_classical_collapse():
    # with no m-atoms and distinct labels, ~ and = coincide
    rng = random.Random(5)
    for _ in range(30):
        u = new_universe([])
        for index in range(rng.randint(1, 4)):
            add_macro_atom(u, f"atom{index}")
        for _ in range(rng.randint(1, 5)):
            existing = u.handles()
            make_qset(u, rng.sample(existing, rng.randint(0, len(existing))))
        assert is_zfu(u)
        for x, y in itertools.product(u.handles(), repeat=2):
            assert indistinguishable(u, x, y) == extensionally_equal(u, x, y)
