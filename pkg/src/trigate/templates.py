"""Circuit templates over qubit pairs and their canonical equivalence classes.

A template is the ordered list of pairs successive two-qubit gates act on,
with adjacent duplicates forbidden (adjacent same-pair gates merge into one).
Templates are grouped under the 12-element symmetry group generated by the
six qubit relabelings and sequence reversal; the canonical representative is
the lexicographically least orbit member under AB < BC < AC.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gates import PAIR_ORDER, PERMUTATIONS, Pair, pair_image

MAX_TEMPLATE_LENGTH = 8


@dataclass(frozen=True)
class CircuitTemplate:
    slots: tuple[Pair, ...]

    def __post_init__(self):
        if not self.slots:
            raise ValueError("a template needs at least one slot")
        slots = tuple(Pair(s) for s in self.slots)
        object.__setattr__(self, "slots", slots)
        for left, right in zip(slots, slots[1:]):
            if left == right:
                raise ValueError(f"adjacent slots share the pair {left}; merge them")

    def __len__(self) -> int:
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    def __str__(self) -> str:
        return ",".join(p.value for p in self.slots)


def parse_template(text: str) -> CircuitTemplate:
    """Parse a comma-separated slot list such as "AB,BC,AB"."""
    names = [part.strip().upper() for part in text.split(",") if part.strip()]
    try:
        return CircuitTemplate(tuple(Pair(name) for name in names))
    except ValueError as exc:
        raise ValueError(f"bad template {text!r}: {exc}") from exc


def all_templates(length: int) -> list[CircuitTemplate]:
    """Every adjacent-distinct pair sequence of the given length (3 * 2^(n-1))."""
    if not 1 <= length <= MAX_TEMPLATE_LENGTH:
        raise ValueError(f"template length must be in 1..{MAX_TEMPLATE_LENGTH}, got {length}")
    out: list[CircuitTemplate] = []
    for first in Pair:
        stack = [(first,)]
        while stack:
            seq = stack.pop()
            if len(seq) == length:
                out.append(CircuitTemplate(seq))
                continue
            for nxt in Pair:
                if nxt != seq[-1]:
                    stack.append(seq + (nxt,))
    return sorted(out, key=_sort_key)


def _sort_key(t: CircuitTemplate) -> tuple[int, ...]:
    return tuple(PAIR_ORDER[p] for p in t.slots)


def transform(t: CircuitTemplate, perm, reverse: bool) -> CircuitTemplate:
    slots = tuple(pair_image(perm, p) for p in t.slots)
    return CircuitTemplate(slots[::-1] if reverse else slots)


def orbit(t: CircuitTemplate) -> set[CircuitTemplate]:
    return {
        transform(t, perm, reverse)
        for perm in PERMUTATIONS
        for reverse in (False, True)
    }


def canonicalize(t: CircuitTemplate) -> CircuitTemplate:
    return min(orbit(t), key=_sort_key)


@dataclass(frozen=True)
class TemplateClass:
    """One orbit of templates under qubit relabelings and reversal."""

    canonical: CircuitTemplate
    orbit_size: int
    symmetries: str

    def __str__(self) -> str:
        return str(self.canonical)


def class_of(t: CircuitTemplate) -> TemplateClass:
    members = orbit(t)
    canonical = min(members, key=_sort_key)
    stabilizer = sum(
        transform(canonical, perm, reverse) == canonical
        for perm in PERMUTATIONS
        for reverse in (False, True)
    )
    description = f"6 qubit relabelings x reversal; stabilizer order {stabilizer}"
    return TemplateClass(canonical=canonical, orbit_size=len(members), symmetries=description)


def enumerate_templates(length: int) -> list[TemplateClass]:
    """Canonical template classes of a given length, sorted lexicographically.

    Orbit sizes over all classes sum to 3 * 2^(length - 1).
    """
    classes: dict[CircuitTemplate, TemplateClass] = {}
    for t in all_templates(length):
        canonical = canonicalize(t)
        if canonical not in classes:
            classes[canonical] = class_of(canonical)
    return sorted(classes.values(), key=lambda c: _sort_key(c.canonical))


def find_class(length: int, template: CircuitTemplate) -> TemplateClass:
    """The enumerated class containing the given template."""
    if len(template) != length:
        raise ValueError(f"template {template} has length {len(template)}, not {length}")
    canonical = canonicalize(template)
    for cls in enumerate_templates(length):
        if cls.canonical == canonical:
            return cls
    raise AssertionError("canonicalized template missing from its own enumeration")
