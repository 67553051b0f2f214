import itertools

import pytest

from trigate.templates import (
    CircuitTemplate,
    all_templates,
    canonicalize,
    class_of,
    enumerate_templates,
    find_class,
    parse_template,
)
from trigate.gates import Pair


def brute_force_class_count(length):
    """Independent orbit oracle over raw label strings."""
    labels = ("AB", "BC", "AC")
    pair_sets = {"AB": frozenset("AB"), "BC": frozenset("BC"), "AC": frozenset("AC")}
    set_to_label = {v: k for k, v in pair_sets.items()}

    seqs = [s for s in itertools.product(labels, repeat=length)
            if all(a != b for a, b in zip(s, s[1:]))]

    def act(seq, qperm, rev):
        mapping = dict(zip("ABC", qperm))
        moved = tuple(set_to_label[frozenset(mapping[q] for q in pair_sets[p])] for p in seq)
        return moved[::-1] if rev else moved

    orbits = []
    seen = set()
    for s in seqs:
        if s in seen:
            continue
        orbit = {act(s, qp, rev)
                 for qp in itertools.permutations("ABC") for rev in (False, True)}
        orbits.append(orbit)
        seen |= orbit
    return len(orbits), sorted(len(o) for o in orbits)


def test_all_templates_counts():
    for length in range(1, 7):
        assert len(all_templates(length)) == 3 * 2 ** (length - 1)
    with pytest.raises(ValueError):
        all_templates(0)
    with pytest.raises(ValueError):
        all_templates(9)


def test_adjacent_duplicates_rejected():
    with pytest.raises(ValueError):
        CircuitTemplate((Pair.AB, Pair.AB, Pair.BC))
    with pytest.raises(ValueError):
        CircuitTemplate(())


def test_class_counts_match_case_analysis():
    # two gates: one class; three gates: the (x,y,x) and (x,y,z) cases;
    # four gates: (x,y,x,y), (x,y,x,z) and (x,y,z,x)
    expected = {1: 1, 2: 1, 3: 2, 4: 3}
    for length, count in expected.items():
        classes = enumerate_templates(length)
        assert len(classes) == count
        assert sum(c.orbit_size for c in classes) == 3 * 2 ** (length - 1)


def test_class_counts_against_brute_force():
    for length in range(1, 7):
        classes = enumerate_templates(length)
        n, sizes = brute_force_class_count(length)
        assert len(classes) == n
        assert sorted(c.orbit_size for c in classes) == sizes


def test_length_four_patterns():
    canon = [str(c.canonical) for c in enumerate_templates(4)]
    assert canon == ["AB,BC,AB,BC", "AB,BC,AB,AC", "AB,BC,AC,AB"]
    sizes = {str(c.canonical): c.orbit_size for c in enumerate_templates(4)}
    assert sizes["AB,BC,AB,BC"] == 6
    assert sizes["AB,BC,AB,AC"] == 12
    assert sizes["AB,BC,AC,AB"] == 6


def test_canonicalization_idempotent_and_total():
    for length in (2, 3, 4, 5):
        classes = {c.canonical for c in enumerate_templates(length)}
        for t in all_templates(length):
            c = canonicalize(t)
            assert canonicalize(c) == c
            assert c in classes  # every sequence lands in exactly one class


def test_witness_template_class():
    witness = parse_template("BC,AB,BC,AB,AC")
    assert str(canonicalize(witness)) == "AB,BC,AB,BC,AC"
    cls = find_class(5, witness)
    assert cls.orbit_size == 12


def test_class_of_orbit_stabilizer():
    for length in (2, 3, 4):
        for cls in enumerate_templates(length):
            again = class_of(cls.canonical)
            assert again.canonical == cls.canonical
            assert again.orbit_size == cls.orbit_size
            # orbit-stabilizer over the 12-element group
            stabilizer = int(again.symmetries.rsplit(" ", 1)[1])
            assert stabilizer * again.orbit_size == 12


def test_parse_template():
    t = parse_template(" ab, BC ,Ab ")
    assert t.slots == (Pair.AB, Pair.BC, Pair.AB)
    with pytest.raises(ValueError):
        parse_template("AB,XY")
    with pytest.raises(ValueError):
        parse_template("AB,AB")
