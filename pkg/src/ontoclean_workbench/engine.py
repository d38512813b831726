"""OntoClean meta-property values and constraint verification.

Each class can carry four meta-properties: Identity (I), Unity (U),
Rigidity (R), and Dependence (D). I and D take ``+``/``-``; U and R also
take the anti value ``~``, which is distinct from ``-``.

Five inheritance constraints are verified over the transitive closure of
the subsumption relation:

* an ancestor with +I forbids -I below it,
* an ancestor with ~R forbids +R and -R below it,
* an ancestor with +U forbids -U and ~U below it,
* an ancestor with ~U forbids +U and -U below it,
* an ancestor with +D forbids -D below it.

A separate check enforces sortal individuation ("no entity without
identity"): every class must have an ancestor-or-self carrying +I.

Labelings may be partial; a pair is only judged when both sides carry the
relevant value, so an incomplete labeling is never violated by what it does
not yet say.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .errors import IllegalValue, PreconditionViolated, UnknownClass
from .taxonomy import Taxonomy


class IdentityValue(Enum):
    PLUS = "+"
    MINUS = "-"


class UnityValue(Enum):
    PLUS = "+"
    MINUS = "-"
    ANTI = "~"


class RigidityValue(Enum):
    PLUS = "+"
    MINUS = "-"
    ANTI = "~"


class DependenceValue(Enum):
    PLUS = "+"
    MINUS = "-"


PROPERTY_KEYS = ("I", "U", "R", "D")

_VALUE_TYPES = {
    "I": IdentityValue,
    "U": UnityValue,
    "R": RigidityValue,
    "D": DependenceValue,
}

_ATTR_FOR_KEY = {
    "I": "identity",
    "U": "unity",
    "R": "rigidity",
    "D": "dependence",
}


def value_from_symbol(prop: str, symbol: str):
    """Turn a property key and a ``+``/``-``/``~`` symbol into the enum value.

    Raises IllegalValue for unknown properties/symbols and for ``~`` on I or D.
    """
    try:
        enum_type = _VALUE_TYPES[prop]
    except KeyError:
        raise IllegalValue(f"unknown meta-property {prop!r}") from None
    try:
        return enum_type(symbol)
    except ValueError:
        raise IllegalValue(f"value {symbol!r} is not legal for {prop}") from None


@dataclass(frozen=True)
class LabelSet:
    """The meta-property values assigned to one class; any subset may be present."""

    identity: IdentityValue | None = None
    unity: UnityValue | None = None
    rigidity: RigidityValue | None = None
    dependence: DependenceValue | None = None

    def get(self, prop: str):
        return getattr(self, _ATTR_FOR_KEY[prop])

    def with_value(self, prop: str, value) -> "LabelSet":
        return replace(self, **{_ATTR_FOR_KEY[prop]: value})

    @property
    def is_total(self) -> bool:
        return all(self.get(p) is not None for p in PROPERTY_KEYS)

    @property
    def is_empty(self) -> bool:
        return all(self.get(p) is None for p in PROPERTY_KEYS)

    def to_json(self) -> dict[str, str]:
        return {p: self.get(p).value for p in PROPERTY_KEYS if self.get(p) is not None}

    @staticmethod
    def from_json(obj: dict[str, str]) -> "LabelSet":
        ls = LabelSet()
        for prop, symbol in obj.items():
            ls = ls.with_value(prop, value_from_symbol(prop, symbol))
        return ls


# A labeling maps class ids to their (possibly partial) label sets.
Labeling = dict[str, LabelSet]


def labeling_to_json(labeling: Labeling) -> dict:
    return {cls: ls.to_json() for cls, ls in labeling.items()}


def labeling_from_json(obj: dict) -> Labeling:
    if not isinstance(obj, dict):
        raise IllegalValue("labeling document must be an object keyed by class id")
    return {cls: LabelSet.from_json(values) for cls, values in obj.items()}


class ViolationKind(Enum):
    # declaration order is the reporting order within one subject
    IDENTITY_INHERITANCE = "IdentityInheritance"
    ANTI_RIGIDITY_INHERITANCE = "AntiRigidityInheritance"
    UNITY_INHERITANCE = "UnityInheritance"
    ANTI_UNITY_INHERITANCE = "AntiUnityInheritance"
    DEPENDENCE_INHERITANCE = "DependenceInheritance"
    SORTAL_INDIVIDUATION = "SortalIndividuation"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    subject: str
    ancestor: str | None
    message: str

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind.value, "subject": self.subject}
        if self.ancestor is not None:
            doc["ancestor"] = self.ancestor
        doc["message"] = self.message
        return doc


_REQUIRED_MARK = {
    ViolationKind.IDENTITY_INHERITANCE: "+I",
    ViolationKind.ANTI_RIGIDITY_INHERITANCE: "~R",
    ViolationKind.UNITY_INHERITANCE: "+U",
    ViolationKind.ANTI_UNITY_INHERITANCE: "~U",
    ViolationKind.DEPENDENCE_INHERITANCE: "+D",
}


def explain_violation(v: Violation) -> str:
    """Deterministic one-sentence explanation naming subject, ancestor, and rule."""
    if v.kind is ViolationKind.SORTAL_INDIVIDUATION:
        return f"{v.subject} has no ancestor-or-self carrying +I (no entity without identity)."
    mark = _REQUIRED_MARK[v.kind]
    return f"{v.subject} must carry {mark} because its ancestor {v.ancestor} carries {mark}."


def _violation(kind: ViolationKind, subject: str, ancestor: str | None = None) -> Violation:
    v = Violation(kind=kind, subject=subject, ancestor=ancestor, message="")
    return replace(v, message=explain_violation(v))


# (kind, property key, ancestor value that constrains, descendant values it forbids)
_INHERITANCE_RULES = (
    (ViolationKind.IDENTITY_INHERITANCE, "I", IdentityValue.PLUS,
     frozenset({IdentityValue.MINUS})),
    (ViolationKind.ANTI_RIGIDITY_INHERITANCE, "R", RigidityValue.ANTI,
     frozenset({RigidityValue.PLUS, RigidityValue.MINUS})),
    (ViolationKind.UNITY_INHERITANCE, "U", UnityValue.PLUS,
     frozenset({UnityValue.MINUS, UnityValue.ANTI})),
    (ViolationKind.ANTI_UNITY_INHERITANCE, "U", UnityValue.ANTI,
     frozenset({UnityValue.PLUS, UnityValue.MINUS})),
    (ViolationKind.DEPENDENCE_INHERITANCE, "D", DependenceValue.PLUS,
     frozenset({DependenceValue.MINUS})),
)


def _check_known(t: Taxonomy, labeling: Labeling) -> None:
    for cls in labeling:
        if cls not in t:
            raise UnknownClass(f"labeling references unknown class {cls!r}")


def check_constraints(t: Taxonomy, labeling: Labeling) -> list[Violation]:
    """Verify the five inheritance constraints.

    For each (class, kind) at most one violation is reported, against the
    nearest violating ancestor (shortest edge distance, ties broken by class
    insertion order). Results are ordered by subject insertion order, then by
    kind declaration order.
    """
    _check_known(t, labeling)
    violations: list[Violation] = []
    for subject in t.classes:
        subject_labels = labeling.get(subject)
        if subject_labels is None or subject_labels.is_empty:
            continue
        distances = t.ancestor_distances(subject)
        for kind, prop, ancestor_value, forbidden in _INHERITANCE_RULES:
            if subject_labels.get(prop) not in forbidden:
                continue
            witnesses = [
                anc for anc in distances
                if (ls := labeling.get(anc)) is not None and ls.get(prop) is ancestor_value
            ]
            if not witnesses:
                continue
            nearest = min(witnesses, key=lambda a: (distances[a], t.index[a]))
            violations.append(_violation(kind, subject, nearest))
    return violations


def check_sortal_individuation(t: Taxonomy, labeling: Labeling) -> list[Violation]:
    """Flag classes whose fully-determined ancestry carries no +I anywhere.

    A class is skipped (undetermined, not violated) while its own identity
    value or any ancestor's identity value is still absent.
    """
    _check_known(t, labeling)
    violations: list[Violation] = []
    for cls in t.classes:
        chain = [cls, *t.ancestor_distances(cls)]
        values = [
            labeling[c].identity if c in labeling else None
            for c in chain
        ]
        if any(v is None for v in values):
            continue
        if not any(v is IdentityValue.PLUS for v in values):
            violations.append(_violation(ViolationKind.SORTAL_INDIVIDUATION, cls))
    return violations


def infer_forced_labels(t: Taxonomy, labeling: Labeling) -> Labeling:
    """Values that a consistent labeling already implies for unlabelled slots.

    Returns only the additions. A slot is filled when exactly one value is
    compatible with the labelled ancestors under the inheritance rules: a +I
    ancestor forces +I, a ~R ancestor forces ~R, a +D ancestor forces +D, and
    a +U (resp. ~U) ancestor forces +U (resp. ~U) unless the two kinds of
    unity ancestors contradict each other, in which case nothing is added.

    Requires the input to be violation-free; merging the result keeps it so.
    """
    if check_constraints(t, labeling):
        raise PreconditionViolated("labeling already violates the inheritance constraints")
    additions: Labeling = {}
    for cls in t.classes:
        current = labeling.get(cls, LabelSet())
        ancestors = [labeling[a] for a in t.ancestor_distances(cls) if a in labeling]
        forced = LabelSet()
        if current.identity is None and any(
            a.identity is IdentityValue.PLUS for a in ancestors
        ):
            forced = forced.with_value("I", IdentityValue.PLUS)
        if current.rigidity is None and any(
            a.rigidity is RigidityValue.ANTI for a in ancestors
        ):
            forced = forced.with_value("R", RigidityValue.ANTI)
        if current.unity is None:
            has_plus = any(a.unity is UnityValue.PLUS for a in ancestors)
            has_anti = any(a.unity is UnityValue.ANTI for a in ancestors)
            if has_plus != has_anti:
                forced = forced.with_value(
                    "U", UnityValue.PLUS if has_plus else UnityValue.ANTI
                )
        if current.dependence is None and any(
            a.dependence is DependenceValue.PLUS for a in ancestors
        ):
            forced = forced.with_value("D", DependenceValue.PLUS)
        if not forced.is_empty:
            additions[cls] = forced
    return additions


def merge_labelings(base: Labeling, additions: Labeling) -> Labeling:
    """New labeling with every value of ``additions`` filled into ``base``."""
    merged = dict(base)
    for cls, extra in additions.items():
        current = merged.get(cls, LabelSet())
        for prop in PROPERTY_KEYS:
            value = extra.get(prop)
            if value is not None:
                current = current.with_value(prop, value)
        merged[cls] = current
    return merged
